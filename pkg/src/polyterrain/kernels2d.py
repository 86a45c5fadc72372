"""Closed-form 2D cell kernels.

All evaluators accept scalars or numpy arrays for ``x`` and ``y`` (cell-local
coordinates in ``[0, 1]``) and broadcast.  Coefficient arrays are indexed
``c[i, j]`` for the monomial ``x**i * y**j``.

Kernels:

* zero-gradient D2M1N3 (``zg_eval``), in two variants:
  ``"paper"`` -- ``h00 + S(x) dx + S(y) dy + A [S(x) y + S(y) x - x y]``
  ``"separable"`` -- ``h00 + S(x) dx + S(y) dy + A S(x) S(y)``
* generic D2M1N3 with imposed heights and gradients (``generic_eval``)
* gradient-interpolation (Perlin) cells with smoothstep order 3 or 5
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import ValidationError

VARIANTS = ("paper", "separable")
ORDERS = (3, 5)


def _check_unit(t):
    assert np.all((np.asarray(t) >= 0.0) & (np.asarray(t) <= 1.0)), "coordinate outside [0, 1]"


def smoothstep3(t):
    """3t^2 - 2t^3."""
    if __debug__:
        _check_unit(t)
    return t * t * (3.0 - 2.0 * t)


def smoothstep5(t):
    """6t^5 - 15t^4 + 10t^3."""
    if __debug__:
        _check_unit(t)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def smoothstep(t, order=3):
    if order == 3:
        return smoothstep3(t)
    if order == 5:
        return smoothstep5(t)
    raise ValidationError(f"smoothstep order must be 3 or 5, got {order!r}")


def smoothstep_prime(t, order=3):
    """First derivative of the smoothstep of the given order."""
    if order == 3:
        return 6.0 * t * (1.0 - t)
    if order == 5:
        return 30.0 * t * t * (t - 1.0) * (t - 1.0)
    raise ValidationError(f"smoothstep order must be 3 or 5, got {order!r}")


def _check_kernel_args(variant, order):
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if order not in ORDERS:
        raise ValidationError(f"smoothstep order must be 3 or 5, got {order!r}")


class Corner2D(NamedTuple):
    h: float
    f: float = 0.0
    g: float = 0.0


# --------------------------------------------------------------------------
# zero-gradient D2M1N3


@dataclass(frozen=True)
class ZgCellParams:
    h00: float
    dx: float
    dy: float
    a: float


def zg_params(h00, h10, h01, h11):
    """Cell-dependent terms of the zero-gradient kernel."""
    return ZgCellParams(h00, h10 - h00, h01 - h00, h11 + h00 - h10 - h01)


def zg_cross(x, y, variant="paper", order=3):
    """Space-only term multiplying ``A``."""
    sx, sy = smoothstep(x, order), smoothstep(y, order)
    if variant == "paper":
        return sx * y + sy * x - x * y
    return sx * sy


def zg_eval(p, x, y, variant="paper", order=3):
    _check_kernel_args(variant, order)
    sx, sy = smoothstep(x, order), smoothstep(y, order)
    if variant == "paper":
        cross = sx * y + sy * x - x * y
    else:
        cross = sx * sy
    return p.h00 + sx * p.dx + sy * p.dy + p.a * cross


def zg_gradient(p, x, y, variant="paper", order=3):
    """Analytic (d/dx, d/dy) of :func:`zg_eval`."""
    _check_kernel_args(variant, order)
    sx, sy = smoothstep(x, order), smoothstep(y, order)
    dsx, dsy = smoothstep_prime(x, order), smoothstep_prime(y, order)
    if variant == "paper":
        cx = dsx * y + sy - y
        cy = sx + dsy * x - x
    else:
        cx = dsx * sy
        cy = sx * dsy
    return dsx * p.dx + p.a * cx, dsy * p.dy + p.a * cy


def zg_pixel(h00, dx, dy, a, sx, sy, cross):
    """Per-pixel body of the table-driven zero-gradient kernel: 3 mul, 3 add."""
    return h00 + sx * dx + sy * dy + a * cross


# --------------------------------------------------------------------------
# generic D2M1N3


@dataclass(frozen=True)
class GenericCellCoeffs:
    c: np.ndarray  # shape (4, 4), c[i, j] multiplies x**i y**j

    def __getitem__(self, ij):
        return self.c[ij]


def generic_coeffs(corners):
    """Closed-form coefficients from corner data ordered (0,0), (1,0), (0,1), (1,1).

    Members of the family with ``c22 = c23 = c32 = c33 = 0``; each ``c_ji``
    mirrors ``c_ij`` with indices swapped and ``f`` replaced by ``g``.
    """
    if len(corners) != 4:
        raise ValidationError("generic_coeffs needs exactly four corners")
    (h00, f00, g00), (h10, f10, g10), (h01, f01, g01), (h11, f11, g11) = (
        Corner2D(*c) for c in corners
    )
    c = np.zeros((4, 4) + np.shape(h00))
    c[0, 0] = h00
    c[1, 0] = f00
    c[0, 1] = g00
    c[2, 0] = 3.0 * (h10 - h00) - 2.0 * f00 - f10
    c[0, 2] = 3.0 * (h01 - h00) - 2.0 * g00 - g01
    c[3, 0] = f10 + f00 - 2.0 * (h10 - h00)
    c[0, 3] = g01 + g00 - 2.0 * (h01 - h00)
    c[2, 1] = 3.0 * (h11 - h01) - 2.0 * f01 - f11 - c[2, 0]
    c[1, 2] = 3.0 * (h11 - h10) - 2.0 * g10 - g11 - c[0, 2]
    c[3, 1] = f11 + f01 - 2.0 * (h11 - h01) - c[3, 0]
    c[1, 3] = g11 + g10 - 2.0 * (h11 - h10) - c[0, 3]
    c[1, 1] = h01 + h10 - h00 - h11 + f01 + g10 - g00 - f00
    return GenericCellCoeffs(c)


def _horner(c, x, y):
    # sum_i x^i (sum_j c[i, j] y^j), both sums by Horner
    out = 0.0
    for i in range(c.shape[0] - 1, -1, -1):
        row = 0.0
        for j in range(c.shape[1] - 1, -1, -1):
            row = row * y + c[i, j]
        out = out * x + row
    return out


def generic_eval(c, x, y):
    coeffs = c.c if isinstance(c, GenericCellCoeffs) else np.asarray(c)
    return _horner(coeffs, x, y)


def generic_gradient(c, x, y):
    coeffs = c.c if isinstance(c, GenericCellCoeffs) else np.asarray(c)
    i = np.arange(4)
    cx = (coeffs * i[:, None])[1:, :]
    cy = (coeffs * i[None, :])[:, 1:]
    return _horner(cx, x, y), _horner(cy, x, y)


# --------------------------------------------------------------------------
# gradient interpolation (Perlin)


@dataclass(frozen=True)
class PerlinCellParams:
    """Corner gradients ``f[i][j], g[i][j]`` at corner ``(i, j)``."""

    f: tuple
    g: tuple
    order: int = 3

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValidationError(f"smoothstep order must be 3 or 5, got {self.order!r}")

    @classmethod
    def from_corners(cls, corners, order=3):
        """Corners ordered (0,0), (1,0), (0,1), (1,1); the ``h`` field is ignored."""
        (_, f00, g00), (_, f10, g10), (_, f01, g01), (_, f11, g11) = (Corner2D(*c) for c in corners)
        return cls(((f00, f01), (f10, f11)), ((g00, g01), (g10, g11)), order)


def perlin_cell_eval(p, x, y):
    f, g = p.f, p.g
    v00 = f[0][0] * x + g[0][0] * y
    v10 = f[1][0] * (x - 1.0) + g[1][0] * y
    v01 = f[0][1] * x + g[0][1] * (y - 1.0)
    v11 = f[1][1] * (x - 1.0) + g[1][1] * (y - 1.0)
    sx, sy = smoothstep(x, p.order), smoothstep(y, p.order)
    h0 = v00 + sx * (v10 - v00)
    h1 = v01 + sx * (v11 - v01)
    return h0 + sy * (h1 - h0)


def perlin_gradient(p, x, y):
    f, g = p.f, p.g
    v00 = f[0][0] * x + g[0][0] * y
    v10 = f[1][0] * (x - 1.0) + g[1][0] * y
    v01 = f[0][1] * x + g[0][1] * (y - 1.0)
    v11 = f[1][1] * (x - 1.0) + g[1][1] * (y - 1.0)
    sx, sy = smoothstep(x, p.order), smoothstep(y, p.order)
    dsx, dsy = smoothstep_prime(x, p.order), smoothstep_prime(y, p.order)
    h0 = v00 + sx * (v10 - v00)
    h1 = v01 + sx * (v11 - v01)
    h0x = f[0][0] + dsx * (v10 - v00) + sx * (f[1][0] - f[0][0])
    h1x = f[0][1] + dsx * (v11 - v01) + sx * (f[1][1] - f[0][1])
    h0y = g[0][0] + sx * (g[1][0] - g[0][0])
    h1y = g[0][1] + sx * (g[1][1] - g[0][1])
    dx = h0x + sy * (h1x - h0x)
    dy = h0y + dsy * (h1 - h0) + sy * (h1y - h0y)
    return dx, dy


# --------------------------------------------------------------------------
# lookup tables


@dataclass(frozen=True)
class RowLut:
    """Space-only tables for one cell, sampled at ``(k + offset) / pixels_per_cell``.

    ``cross[ky, kx]`` is the term multiplying ``A`` for the chosen variant.
    """

    pixels_per_cell: int
    order: int
    variant: str
    offset: float
    t: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    cross: np.ndarray


def build_row_lut(pixels_per_cell, order=3, variant="paper", offset=0.0):
    if isinstance(pixels_per_cell, bool) or not isinstance(pixels_per_cell, (int, np.integer)):
        raise ValidationError("pixels_per_cell must be an integer")
    if pixels_per_cell < 1:
        raise ValidationError(f"pixels_per_cell must be >= 1, got {pixels_per_cell}")
    if not 0.0 <= offset < 1.0:
        raise ValidationError("offset must lie in [0, 1)")
    _check_kernel_args(variant, order)
    t = (np.arange(pixels_per_cell) + offset) / pixels_per_cell
    s = smoothstep(t, order)
    cross = zg_cross(t[None, :], t[:, None], variant, order)
    for arr in (t, s, cross):
        arr.setflags(write=False)
    return RowLut(int(pixels_per_cell), order, variant, float(offset), t, s, s, cross)


def zg_eval_row_lut(p, lut, ky):
    """One pixel row (index ``ky``) of one cell evaluated from ``lut``."""
    sy = lut.sy[ky]
    cross = lut.cross[ky]
    return zg_pixel(p.h00, p.dx, p.dy, p.a, lut.sx, sy, cross)
