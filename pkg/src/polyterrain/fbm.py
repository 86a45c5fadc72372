"""Multi-octave (fractal Brownian motion) heightmap synthesis.

Octave ``i`` has amplitude ``h0 * p**i`` and spans ``f0 * ratio**i`` cells
across the map.  A map of ``R`` pixels covers the unit square; pixel ``j``
has its center at ``(j + 0.5) / R``, and its cell-local coordinate at octave
``i`` is the fractional part of ``(j + 0.5) * f0 * ratio**i / R``.  Cell
indices are global, so a sub-window rendered on its own sees exactly the
same lattice data and arithmetic as the full map.

Generation has two stages per octave: cell initialization (lattice hashing
and per-cell coefficients, cost proportional to the number of cells) and
pixel evaluation (a compiled loop, cost proportional to ``R**2``).
Space-only tables are built once per geometry in a :class:`RenderPlan`.
"""

import math
import os
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels2d, lattice
from ._octave import octave_loop
from ._pixel import GENERIC_TERMS
from ._validation import ValidationError, check_positive_int, check_real

METHODS = ("zg_paper", "zg_separable", "generic", "perlin3", "perlin5")
_FAMILY = {
    "zg_paper": "zg",
    "zg_separable": "zg",
    "generic": "generic",
    "perlin3": "perlin",
    "perlin5": "perlin",
}


class SubPixelOctaveWarning(UserWarning):
    """An octave's cells are smaller than one pixel."""


@dataclass(frozen=True)
class FbmConfig:
    """Parameters of one fractal heightmap.

    ``frequency_ratio`` multiplies the cell count between octaves; its
    reciprocal is what some authors call lacunarity.  ``smoothstep`` selects
    the smoothstep order of the zero-gradient kernels; the Perlin methods
    carry their own order in the name.  ``gradient_weight`` defaults to
    ``base_amplitude / 100`` and only affects ``generic``.
    """

    seed: int = 0
    method: str = "zg_paper"
    octaves: int = 8
    resolution: int = 512
    base_frequency: int = 2
    frequency_ratio: float = 2.0
    persistence: float = 0.5
    base_amplitude: float = 1.0
    gradient_weight: float | None = None
    normalize: bool = False
    smoothstep: int = 3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        check_positive_int(self.octaves, "octaves")
        check_positive_int(self.resolution, "resolution")
        check_positive_int(self.base_frequency, "base_frequency")
        check_real(self.frequency_ratio, "frequency_ratio", low=1.0, low_open=True)
        check_real(self.persistence, "persistence", low=0.0, high=1.0, low_open=True)
        check_real(self.base_amplitude, "base_amplitude", low=0.0, low_open=True)
        if self.gradient_weight is not None:
            check_real(self.gradient_weight, "gradient_weight", low=0.0)
        if self.smoothstep not in kernels2d.ORDERS:
            raise ValidationError(f"smoothstep must be 3 or 5, got {self.smoothstep!r}")

    @property
    def w(self):
        if self.gradient_weight is None:
            return lattice.default_gradient_weight(self.base_amplitude)
        return self.gradient_weight

    @property
    def family(self):
        return _FAMILY[self.method]

    @property
    def order(self):
        if self.method == "perlin3":
            return 3
        if self.method == "perlin5":
            return 5
        return self.smoothstep

    @property
    def variant(self):
        return "separable" if self.method == "zg_separable" else "paper"

    def amplitude(self, octave):
        return self.base_amplitude * self.persistence**octave

    def cells_across(self, octave):
        return self.base_frequency * self.frequency_ratio**octave

    @property
    def pixels_per_base_cell(self):
        return self.resolution / self.base_frequency


@dataclass
class Heightmap:
    """A rendered map with its provenance.

    ``data`` has shape ``(rows, cols)``; row index is ``y``.  ``origin`` is
    the global pixel offset ``(x0, y0)`` of ``data[0, 0]``.
    """

    data: np.ndarray
    config: FbmConfig | None = None
    origin: tuple = (0, 0)
    octave_times: list = field(default_factory=list)
    original_range: tuple | None = None
    normalized: bool = False
    constant: bool = False

    @property
    def resolution(self):
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape

    @property
    def total_time(self):
        return sum(self.octave_times)


# --------------------------------------------------------------------------
# geometry and space-only tables


def _axis_coords(start, count, scale):
    g = np.arange(start, start + count, dtype=np.float64)
    u = (g + 0.5) * scale
    cell = np.floor(u)
    return cell.astype(np.int64), u - cell


@dataclass
class _OctaveTables:
    col_cell: np.ndarray
    row_cell: np.ndarray
    cx0: int
    cy0: int
    ncx: int
    ncy: int
    tables: tuple


@dataclass
class RenderPlan:
    """Space-only tables for a window of a map, reusable across seeds."""

    config: FbmConfig
    x0: int
    y0: int
    width: int
    height: int
    octaves: list


def _space_tables(cfg, col_t, row_t):
    family, order = cfg.family, cfg.order
    if family == "zg":
        sx = kernels2d.smoothstep(col_t, order)
        sy = kernels2d.smoothstep(row_t, order)
        ux, col_k = np.unique(col_t, return_inverse=True)
        uy, row_k = np.unique(row_t, return_inverse=True)
        cross = kernels2d.zg_cross(ux[None, :], uy[:, None], cfg.variant, order)
        return (sy, sx, row_k.astype(np.int64), col_k.astype(np.int64), np.ascontiguousarray(cross))
    if family == "perlin":
        return (row_t, row_t - 1.0, kernels2d.smoothstep(row_t, order),
                col_t, col_t - 1.0, kernels2d.smoothstep(col_t, order))
    return (row_t, row_t * row_t, row_t * row_t * row_t,
            col_t, col_t * col_t, col_t * col_t * col_t)


def make_plan(cfg, x0=0, y0=0, width=None, height=None):
    """Precompute per-octave pixel-to-cell maps and space-only tables."""
    width = cfg.resolution if width is None else check_positive_int(width, "width")
    height = width if height is None else check_positive_int(height, "height")
    octs = []
    warned = False
    for i in range(cfg.octaves):
        scale = cfg.cells_across(i) / cfg.resolution
        if scale > 1.0 and not warned:
            warnings.warn(
                f"octave {i} has cells smaller than one pixel "
                f"({cfg.cells_across(i):g} cells over {cfg.resolution} pixels)",
                SubPixelOctaveWarning,
                stacklevel=3,
            )
            warned = True
        col_cell, col_t = _axis_coords(x0, width, scale)
        row_cell, row_t = _axis_coords(y0, height, scale)
        cx0, cy0 = int(col_cell[0]), int(row_cell[0])
        octs.append(
            _OctaveTables(
                col_cell=col_cell - cx0,
                row_cell=row_cell - cy0,
                cx0=cx0,
                cy0=cy0,
                ncx=int(col_cell[-1]) - cx0 + 1,
                ncy=int(row_cell[-1]) - cy0 + 1,
                tables=_space_tables(cfg, col_t, row_t),
            )
        )
    return RenderPlan(cfg, x0, y0, width, height, octs)


# --------------------------------------------------------------------------
# cell initialization


def _default_corner_source(cfg):
    unit = cfg.family == "perlin"
    gradients = cfg.family != "zg"
    w = cfg.w

    def source(octave, x0, y0, nx, ny):
        return lattice.lattice_block(cfg.seed, octave, x0, y0, nx, ny, w=w, unit=unit,
                                     gradients=gradients)

    return source


def zero_corner_source(octave, x0, y0, nx, ny):
    """Corner source returning all-zero data; a test hook."""
    z = np.zeros((ny, nx))
    return z, z, z


def generic_cell_coeffs(h, f, g):
    """Vectorized closed-form coefficients for every cell of a corner block.

    ``h, f, g`` have shape ``(ny + 1, nx + 1)``; returns ``(ny, nx, 12)`` in
    the column order of ``GENERIC_TERMS``.
    """
    h00, h10, h01, h11 = h[:-1, :-1], h[:-1, 1:], h[1:, :-1], h[1:, 1:]
    f00, f10, f01, f11 = f[:-1, :-1], f[:-1, 1:], f[1:, :-1], f[1:, 1:]
    g00, g10, g01, g11 = g[:-1, :-1], g[:-1, 1:], g[1:, :-1], g[1:, 1:]
    c20 = 3.0 * (h10 - h00) - 2.0 * f00 - f10
    c02 = 3.0 * (h01 - h00) - 2.0 * g00 - g01
    c30 = f10 + f00 - 2.0 * (h10 - h00)
    c03 = g01 + g00 - 2.0 * (h01 - h00)
    c21 = 3.0 * (h11 - h01) - 2.0 * f01 - f11 - c20
    c12 = 3.0 * (h11 - h10) - 2.0 * g10 - g11 - c02
    c31 = f11 + f01 - 2.0 * (h11 - h01) - c30
    c13 = g11 + g10 - 2.0 * (h11 - h10) - c03
    c11 = h01 + h10 - h00 - h11 + f01 + g10 - g00 - f00
    terms = {(0, 0): h00, (1, 0): f00, (0, 1): g00, (2, 0): c20, (0, 2): c02,
             (3, 0): c30, (0, 3): c03, (2, 1): c21, (1, 2): c12, (3, 1): c31,
             (1, 3): c13, (1, 1): c11}
    return np.stack([terms[t] for t in GENERIC_TERMS], axis=-1)


def cell_params(cfg, octave, tabs, source):
    """Amplitude-scaled per-cell terms for one octave."""
    h, f, g = source(octave, tabs.cx0, tabs.cy0, tabs.ncx + 1, tabs.ncy + 1)
    amp = cfg.amplitude(octave)
    if cfg.family == "zg":
        h00 = h[:-1, :-1]
        dx = h[:-1, 1:] - h00
        dy = h[1:, :-1] - h00
        a = h[1:, 1:] + h00 - h[:-1, 1:] - h[1:, :-1]
        params = np.stack([h00, dx, dy, a], axis=-1)
    elif cfg.family == "perlin":
        # f00, g00, f10, g10, f01, g01, f11, g11 with corner (i, j) at [y + j, x + i]
        params = np.stack(
            [f[:-1, :-1], g[:-1, :-1], f[:-1, 1:], g[:-1, 1:],
             f[1:, :-1], g[1:, :-1], f[1:, 1:], g[1:, 1:]],
            axis=-1,
        )
    else:
        params = generic_cell_coeffs(h, f, g)
    return np.ascontiguousarray(params * amp)


# --------------------------------------------------------------------------
# rendering


def default_threads():
    env = os.environ.get("TERRAIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"TERRAIN_THREADS must be an integer, got {env!r}") from None
    return 1


def render(plan, corner_source=None, out=None, threads=None, seed=None):
    """Render ``plan`` into ``out`` (allocated when None) and return ``(out, octave_times)``.

    ``seed`` overrides the plan's seed without rebuilding tables.
    """
    cfg = plan.config if seed is None else replace(plan.config, seed=seed)
    source = corner_source or _default_corner_source(cfg)
    threads = default_threads() if threads is None else threads
    if out is None:
        out = np.zeros((plan.height, plan.width))
    else:
        if out.shape != (plan.height, plan.width):
            raise ValidationError(f"output buffer has shape {out.shape}, expected {(plan.height, plan.width)}")
        out[...] = 0.0
    loop = octave_loop(cfg.family, threads)
    times = []
    for i, tabs in enumerate(plan.octaves):
        t0 = time.perf_counter_ns()
        params = cell_params(cfg, i, tabs, source)
        loop(out, params, tabs.row_cell, tabs.col_cell, *tabs.tables)
        times.append((time.perf_counter_ns() - t0) * 1e-9)
    return out, times


def generate_heightmap(cfg, corner_source=None, threads=None):
    """Render the full ``R x R`` map for ``cfg``."""
    plan = make_plan(cfg)
    data, times = render(plan, corner_source, threads=threads)
    hm = Heightmap(data, cfg, (0, 0), times)
    return normalize_map(hm) if cfg.normalize else hm


def generate_region(cfg, origin=(0, 0), extent=None, corner_source=None, threads=None):
    """Render a window of the (unbounded) map at ``cfg``'s pixel scale.

    ``origin`` is the global pixel offset ``(x0, y0)`` and must fall on
    octave-0 cell boundaries; ``extent`` is ``(width, height)`` or a single
    size.  Pixel values are bit-identical to the same pixels of any larger
    render with the same config.  ``cfg.normalize`` is ignored, since
    normalization depends on the whole map.
    """
    x0, y0 = (int(v) for v in origin)
    for v, name in ((x0, "x"), (y0, "y")):
        if (v * cfg.base_frequency) % cfg.resolution != 0:
            raise ValidationError(
                f"origin {name}={v} is not aligned to octave-0 cells "
                f"of {cfg.pixels_per_base_cell:g} pixels"
            )
    if extent is None:
        extent = cfg.resolution
    w, h = (extent, extent) if np.isscalar(extent) else extent
    plan = make_plan(cfg, x0, y0, w, h)
    data, times = render(plan, corner_source, threads=threads)
    return Heightmap(data, cfg, (x0, y0), times)


def normalize_map(hm):
    """Affine rescale to ``[-1, 1]``; constant maps come back unchanged with ``constant`` set."""
    lo, hi = float(hm.data.min()), float(hm.data.max())
    if lo == hi:
        return replace(hm, data=hm.data.copy(), constant=True, original_range=(lo, hi))
    if lo == -1.0 and hi == 1.0:
        data = hm.data.copy()
    else:
        data = 2.0 * (hm.data - lo) / (hi - lo) - 1.0
    rng = hm.original_range if hm.normalized and hm.original_range else (lo, hi)
    return replace(hm, data=data, normalized=True, original_range=rng)


# --------------------------------------------------------------------------
# point evaluation (vectorized numpy path, independent of the compiled loops)


def evaluate_points(cfg, points, corner_source=None):
    """fBm value at arbitrary map coordinates ``points`` of shape ``(n, 2)`` as ``(x, y)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"points must have shape (n, 2), got {pts.shape}")
    source = corner_source or _default_corner_source(cfg)
    total = np.zeros(len(pts))
    for i in range(cfg.octaves):
        c = cfg.cells_across(i)
        u, v = pts[:, 0] * c, pts[:, 1] * c
        cx, cy = np.floor(u).astype(np.int64), np.floor(v).astype(np.int64)
        x, y = u - cx, v - cy
        if len(pts) == 0:
            break
        x0, y0 = int(cx.min()), int(cy.min())
        nx, ny = int(cx.max()) - x0 + 2, int(cy.max()) - y0 + 2
        h, f, g = source(i, x0, y0, nx, ny)
        jx, jy = cx - x0, cy - y0

        def corner(arr, di, dj):
            return arr[jy + dj, jx + di]

        if cfg.family == "zg":
            p = kernels2d.ZgCellParams(
                corner(h, 0, 0),
                corner(h, 1, 0) - corner(h, 0, 0),
                corner(h, 0, 1) - corner(h, 0, 0),
                corner(h, 1, 1) + corner(h, 0, 0) - corner(h, 1, 0) - corner(h, 0, 1),
            )
            val = kernels2d.zg_eval(p, x, y, cfg.variant, cfg.order)
        elif cfg.family == "perlin":
            p = kernels2d.PerlinCellParams(
                ((corner(f, 0, 0), corner(f, 0, 1)), (corner(f, 1, 0), corner(f, 1, 1))),
                ((corner(g, 0, 0), corner(g, 0, 1)), (corner(g, 1, 0), corner(g, 1, 1))),
                cfg.order,
            )
            val = kernels2d.perlin_cell_eval(p, x, y)
        else:
            corners = [(corner(h, i_, j_), corner(f, i_, j_), corner(g, i_, j_))
                       for i_, j_ in ((0, 0), (1, 0), (0, 1), (1, 1))]
            val = kernels2d.generic_eval(kernels2d.generic_coeffs(corners), x, y)
        total += cfg.amplitude(i) * val
    return total


# --------------------------------------------------------------------------
# amplitude bounds


def kernel_bound(method, w=0.01, smoothstep=3, samples=401):
    """Upper bound on ``|kernel|`` for one octave with unit amplitude.

    Heights are bounded by 1 and gradient magnitudes by ``w`` (1 for the
    Perlin methods).  Each kernel is linear in its corner data, so the bound
    is the maximum over the cell of the summed absolute corner weights,
    taken on a dense grid and padded by 1% to cover between-sample peaks.
    """
    t = np.linspace(0.0, 1.0, samples)
    x, y = np.meshgrid(t, t, indexing="xy")
    cfg = FbmConfig(method=method, smoothstep=smoothstep, gradient_weight=w, octaves=1)
    corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
    total = np.zeros_like(x)
    for k in range(4):
        def unit(kind):
            data = [[0.0, 0.0, 0.0] for _ in corners]
            data[k][kind] = 1.0
            return data

        if cfg.family == "zg":
            hs = [c[0] for c in unit(0)]
            total += np.abs(kernels2d.zg_eval(kernels2d.zg_params(*hs), x, y, cfg.variant, cfg.order))
        elif cfg.family == "perlin":
            fx = kernels2d.perlin_cell_eval(kernels2d.PerlinCellParams.from_corners(unit(1), cfg.order), x, y)
            gy = kernels2d.perlin_cell_eval(kernels2d.PerlinCellParams.from_corners(unit(2), cfg.order), x, y)
            total += np.hypot(fx, gy)
        else:
            hv = kernels2d.generic_eval(kernels2d.generic_coeffs(unit(0)), x, y)
            fx = kernels2d.generic_eval(kernels2d.generic_coeffs(unit(1)), x, y)
            gy = kernels2d.generic_eval(kernels2d.generic_coeffs(unit(2)), x, y)
            total += np.abs(hv) + w * np.hypot(fx, gy)
    return 1.01 * float(total.max())


def fbm_bound(cfg):
    """``h0 * sum(p**i) * K`` for the config's kernel."""
    k = kernel_bound(cfg.method, cfg.w, cfg.smoothstep)
    return cfg.base_amplitude * sum(cfg.persistence**i for i in range(cfg.octaves)) * k


def octave_count_for(resolution, base_frequency=2, frequency_ratio=2.0):
    """Largest octave count whose finest cells still span at least one pixel."""
    return max(1, int(math.floor(math.log(resolution / base_frequency, frequency_ratio))) + 1)
