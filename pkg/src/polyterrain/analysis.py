"""Fractal-dimension measurements: sinusoid crests and raster coastlines.

Both routes estimate ``D`` from a power law ``L(eps) = k * eps**(1 - D)``
fitted by least squares on ``(log eps, log L)``.
"""

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import EmptyMaskError, NumericalError, ValidationError, check_real
from .fbm import FbmConfig, Heightmap, generate_heightmap

DEFAULT_BOX_SIZES = (2, 4, 8, 16, 32, 64)
QUAD_RTOL = 1e-6
QUAD_FAIL_RTOL = 1e-4


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r2: float

    @property
    def dimension(self):
        return 1.0 - self.slope

    @property
    def prefactor(self):
        return math.exp(self.intercept)


def r_squared(y, resid):
    """Coefficient of determination of a fit with residuals ``resid``."""
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # a flat response up to rounding is a perfect fit, not an undefined one
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y**2))):
        return 1.0
    return 1.0 - float(np.sum(resid**2)) / ss_tot


def fit_power_law(eps, lengths):
    """Least-squares line through ``(log eps, log L)``."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(lengths, dtype=float))
    if x.size < 2:
        raise ValidationError("need at least two points to fit a power law")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    r2 = r_squared(y, resid)
    return PowerLawFit(float(slope), float(intercept), r2)


# --------------------------------------------------------------------------
# sinusoid crest


@dataclass(frozen=True)
class CrestConfig:
    """Crest ``H(x) = sum_{i=0..N} a**-i sin(f**i x)`` on ``[0, 2 pi]``.

    ``panels`` is the number of Simpson intervals per period of the
    highest-frequency term.
    """

    a: float = 2.0
    f: float = 2.0
    octaves: int = 0
    panels: int = 64

    def __post_init__(self):
        check_real(self.a, "a", low=1.0, low_open=True)
        check_real(self.f, "f", low=1.0, low_open=True)
        if self.octaves < 0:
            raise ValidationError("octaves must be non-negative")
        if self.panels < 8:
            raise ValidationError("need at least 8 panels per period of the finest term")


@dataclass
class CrestReport:
    eps: np.ndarray
    lengths: np.ndarray
    dimension: float
    prefactor: float
    r2: float
    degenerate: bool = False

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "eps", "L"])
        for n, (e, l) in enumerate(zip(self.eps, self.lengths)):
            w.writerow([n, repr(float(e)), repr(float(l))])
        return buf.getvalue()


def crest_height(x, cfg):
    x = np.asarray(x, dtype=float)
    i = np.arange(cfg.octaves + 1, dtype=float)
    return np.sum(cfg.a ** (-i) * np.sin(np.multiply.outer(x, cfg.f**i)), axis=-1)


def _crest_slope(x, cfg):
    i = np.arange(cfg.octaves + 1, dtype=float)
    return np.cos(np.multiply.outer(x, cfg.f**i)) @ ((cfg.f / cfg.a) ** i)


def _simpson_length(cfg, intervals):
    x = np.linspace(0.0, 2.0 * np.pi, intervals + 1)
    # chunked to bound memory for many octaves
    y = np.empty_like(x)
    step = 1 << 16
    for s in range(0, x.size, step):
        y[s:s + step] = np.sqrt(1.0 + _crest_slope(x[s:s + step], cfg) ** 2)
    h = 2.0 * np.pi / intervals
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def crest_length(cfg):
    """Arc length of the crest by composite Simpson, refined by panel doubling."""
    n = int(math.ceil(cfg.panels * cfg.f**cfg.octaves))
    n += n % 2
    prev = _simpson_length(cfg, n)
    for _ in range(2):
        n *= 2
        cur = _simpson_length(cfg, n)
        rel = abs(cur - prev) / abs(cur)
        if rel <= QUAD_RTOL:
            return float(cur)
        prev = cur
    if rel > QUAD_FAIL_RTOL:
        raise NumericalError(f"crest quadrature did not converge (relative change {rel:.2e})")
    return float(cur)


def crest_dimension(a, f, n_max, panels=64):
    """Dimension from ``(eps_N = f**-N, L(N))`` for ``N = 0..n_max``.

    The slope is fitted on the last half of the points, where the curve is
    closest to its asymptotic power law.
    """
    if n_max < 4:
        raise ValidationError("n_max must be at least 4")
    eps, lengths = [], []
    for n in range(n_max + 1):
        eps.append(float(f) ** -n)
        lengths.append(crest_length(CrestConfig(a, f, n, panels)))
    eps, lengths = np.array(eps), np.array(lengths)
    if np.all(lengths == lengths[0]):
        return CrestReport(eps, lengths, 1.0, float(lengths[0]), 1.0, degenerate=True)
    tail = slice(len(eps) // 2, None)
    fit = fit_power_law(eps[tail], lengths[tail])
    return CrestReport(eps, lengths, fit.dimension, fit.prefactor, fit.r2)


# --------------------------------------------------------------------------
# raster coastlines


@dataclass
class CoastlineMask:
    """Land pixels 4-adjacent to at least one water pixel."""

    mask: np.ndarray
    sea_level: float
    land_fraction: float

    @property
    def resolution(self):
        return self.mask.shape[0]

    @property
    def n_pixels(self):
        return int(self.mask.sum())


def _as_array(hm):
    return hm.data if isinstance(hm, Heightmap) else np.asarray(hm, dtype=float)


def coastline_mask(hm, sea_level="median"):
    """Coastline of ``hm`` (a :class:`Heightmap` or 2D array) at ``sea_level``.

    Land is ``h >= sea_level``; pixels outside the map do not count as water.
    """
    data = _as_array(hm)
    if data.ndim != 2 or min(data.shape) < 2:
        raise ValidationError("need a 2D map at least 2 pixels on each side")
    if isinstance(sea_level, str):
        if sea_level != "median":
            raise ValidationError(f"sea level must be a number or 'median', got {sea_level!r}")
        level = float(np.median(data))
    else:
        level = check_real(sea_level, "sea_level")
    land = data >= level
    water = ~land
    near_water = np.zeros_like(land)
    near_water[1:, :] |= water[:-1, :]
    near_water[:-1, :] |= water[1:, :]
    near_water[:, 1:] |= water[:, :-1]
    near_water[:, :-1] |= water[:, 1:]
    mask = land & near_water
    if not mask.any():
        raise EmptyMaskError(f"no coastline at sea level {level:g}: map is all land or all water")
    return CoastlineMask(mask, level, float(land.mean()))


@dataclass
class BoxCountReport:
    sizes: np.ndarray
    counts: np.ndarray
    lengths: np.ndarray
    dimension: float
    prefactor: float
    r2: float

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "Nb", "L"])
        for e, n, l in zip(self.sizes, self.counts, self.lengths):
            w.writerow([int(e), int(n), int(l)])
        return buf.getvalue()


def count_boxes(mask, size):
    """Number of ``size x size`` boxes, anchored at the origin, holding any set pixel."""
    m = np.asarray(mask, dtype=bool)
    ny, nx = m.shape
    py, px = -ny % size, -nx % size
    if py or px:
        m = np.pad(m, ((0, py), (0, px)))
    blocks = m.reshape(m.shape[0] // size, size, m.shape[1] // size, size)
    return int(blocks.any(axis=(1, 3)).sum())


def box_count(mask, sizes=DEFAULT_BOX_SIZES):
    """Box counts ``Nb(eps)``, lengths ``L = Nb * eps`` and the fitted dimension."""
    m = mask.mask if isinstance(mask, CoastlineMask) else np.asarray(mask, dtype=bool)
    sizes = np.array(sorted(int(s) for s in sizes))
    if sizes.size < 3:
        raise ValidationError("box counting needs at least 3 box sizes")
    if sizes[0] < 1 or np.any(np.diff(sizes) <= 0):
        raise ValidationError("box sizes must be distinct positive integers")
    if not m.any():
        raise EmptyMaskError("empty mask")
    counts = np.array([count_boxes(m, s) for s in sizes])
    lengths = counts * sizes
    fit = fit_power_law(sizes, lengths)
    return BoxCountReport(sizes, counts, lengths, fit.dimension, fit.prefactor, fit.r2)


@dataclass
class DimensionSweep:
    rows: list = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "p", "D", "R2"])
        for r in self.rows:
            w.writerow([r["N"], repr(r["p"]), repr(r["D"]), repr(r["R2"])])
        return buf.getvalue()

    def dimension(self, n, p):
        for r in self.rows:
            if r["N"] == n and r["p"] == p:
                return r["D"]
        raise KeyError((n, p))


def map_dimension(cfg, sea_level="median", sizes=DEFAULT_BOX_SIZES):
    """generate -> coastline -> box count for one config."""
    return box_count(coastline_mask(generate_heightmap(cfg), sea_level), sizes)


def dimension_vs_octaves(template, octaves, persistences, sea_level="median", sizes=DEFAULT_BOX_SIZES):
    """Fitted coastline dimension for every ``(N, p)`` pair."""
    if not isinstance(template, FbmConfig):
        raise ValidationError("template must be an FbmConfig")
    sweep = DimensionSweep()
    for p in persistences:
        for n in octaves:
            rep = map_dimension(replace(template, octaves=int(n), persistence=float(p)), sea_level, sizes)
            sweep.rows.append({"N": int(n), "p": float(p), "D": rep.dimension, "R2": rep.r2})
    return sweep
