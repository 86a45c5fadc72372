"""Wall-clock benchmarks of heightmap generation and cost-model fits.

Each timed repetition renders into a preallocated buffer from a prebuilt
plan, so the measurement covers cell initialization and pixel evaluation
only: no allocation, table building or file I/O.
"""

import csv
import io
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from ._validation import TerrainError, ValidationError
from .analysis import r_squared
from .fbm import FbmConfig, make_plan, render

BASELINE = "zg_paper"


def _check_clock():
    info = time.get_clock_info("perf_counter")
    if not info.monotonic:
        raise TerrainError("perf_counter is not monotonic on this platform; refusing to benchmark")


@dataclass
class BenchRun:
    method: str
    octaves: int
    resolution: int
    times: list = field(default_factory=list)

    @property
    def repetitions(self):
        return len(self.times)

    @property
    def mean(self):
        return statistics.fmean(self.times)

    @property
    def median(self):
        return statistics.median(self.times)

    @property
    def std(self):
        return statistics.stdev(self.times) if len(self.times) > 1 else 0.0


def time_generation(cfg, reps=100, warmup=2, threads=1):
    """Time ``reps`` renders of ``cfg`` after ``warmup`` untimed ones."""
    if reps < 3:
        raise ValidationError("need at least 3 repetitions")
    _check_clock()
    plan = make_plan(cfg)
    buf = np.zeros((plan.height, plan.width))
    for _ in range(warmup):
        render(plan, out=buf, threads=threads)
    run = BenchRun(cfg.method, cfg.octaves, cfg.resolution)
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        render(plan, out=buf, threads=threads)
        run.times.append((time.perf_counter_ns() - t0) * 1e-9)
    return run


def run_grid(methods, octaves, sizes, reps=100, warmup=2, threads=1, seed=0, **cfg_kwargs):
    runs = []
    for r in sizes:
        for n in octaves:
            for m in methods:
                cfg = FbmConfig(seed=seed, method=m, octaves=n, resolution=r, **cfg_kwargs)
                runs.append(time_generation(cfg, reps, warmup, threads))
    return runs


def runs_to_csv(runs):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "N", "R", "reps", "mean_s", "median_s", "std_s"])
    for r in runs:
        w.writerow([r.method, r.octaves, r.resolution, r.repetitions,
                    f"{r.mean:.9g}", f"{r.median:.9g}", f"{r.std:.9g}"])
    return buf.getvalue()


@dataclass
class SpeedupReport:
    """``S_m = T_m / T_baseline`` per ``(method, N, R)`` using mean times."""

    baseline: str
    ratios: dict = field(default_factory=dict)

    def mean_ratio(self, method):
        vals = [v for (m, _, _), v in self.ratios.items() if m == method]
        return statistics.fmean(vals)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "N", "R", "speedup"])
        for (m, n, r), v in sorted(self.ratios.items()):
            w.writerow([m, n, r, f"{v:.6g}"])
        return buf.getvalue()


def speedup_report(runs, baseline=BASELINE):
    base = {(r.octaves, r.resolution): r.mean for r in runs if r.method == baseline}
    if not base:
        raise ValidationError(f"no runs for baseline method {baseline!r}")
    rep = SpeedupReport(baseline)
    for r in runs:
        key = (r.octaves, r.resolution)
        if key in base:
            rep.ratios[(r.method, r.octaves, r.resolution)] = r.mean / base[key]
    return rep


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float


def line_fit(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    r2 = r_squared(y, y - (slope * x + intercept))
    return LineFit(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class CostModelFit:
    """``T = alpha * N * R**2 + beta * 2**(2N)`` fitted with non-negative coefficients."""

    alpha: float
    beta: float
    r2: float

    def predict(self, n, r):
        return self.alpha * n * r * r + self.beta * 4.0**n

    def eval_share(self, n, r):
        """Fraction of the predicted time spent in the pixel-evaluation term."""
        total = self.predict(n, r)
        return self.alpha * n * r * r / total if total > 0 else 1.0


def fit_cost_model(runs, statistic="mean"):
    """Non-negative least squares fit of :class:`CostModelFit` to ``runs`` (mean or median times)."""
    if statistic not in ("mean", "median"):
        raise ValidationError(f"statistic must be 'mean' or 'median', got {statistic!r}")
    n = np.array([r.octaves for r in runs], dtype=float)
    res = np.array([r.resolution for r in runs], dtype=float)
    t = np.array([getattr(r, statistic) for r in runs])
    A = np.column_stack([n * res**2, 4.0**n])
    # column scaling keeps nnls well conditioned
    scale = A.max(axis=0)
    scale[scale == 0] = 1.0
    coef, _ = nnls(A / scale, t)
    coef = coef / scale
    r2 = r_squared(t, t - A @ coef)
    return CostModelFit(float(coef[0]), float(coef[1]), r2)


def octave_scaling(method=BASELINE, resolution=1024, octaves=range(1, 9), reps=30, warmup=2, seed=0):
    """Normalized median time ``T(N) / T_zg(N=1)`` and a straight-line fit over ``N``.

    Each config is timed in one consecutive block, so caches stay warm as in
    repeated generation of a single map.
    """
    octaves = list(octaves)
    ref = time_generation(FbmConfig(seed=seed, method=BASELINE, octaves=1, resolution=resolution),
                          reps, warmup)
    runs = [time_generation(FbmConfig(seed=seed, method=method, octaves=n, resolution=resolution),
                            reps, warmup) for n in octaves]
    norm = [r.median / ref.median for r in runs]
    return runs, norm, line_fit(octaves, norm)


def resolution_scaling(method=BASELINE, sizes=(128, 256, 512, 1024, 2048), octaves=3, reps=20,
                       warmup=2, seed=0):
    """``sqrt(T)`` (median) against ``R`` with a straight-line fit."""
    sizes = list(sizes)
    runs = [time_generation(FbmConfig(seed=seed, method=method, octaves=octaves, resolution=r),
                            reps, warmup) for r in sizes]
    root = [np.sqrt(r.median) for r in runs]
    return runs, root, line_fit(sizes, root)
