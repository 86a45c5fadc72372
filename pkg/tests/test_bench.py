import numpy as np
import pytest

from polyterrain import bench
from polyterrain._validation import TerrainError, ValidationError
from polyterrain.fbm import FbmConfig


def test_time_generation_structure():
    run = bench.time_generation(FbmConfig(octaves=2, resolution=32), reps=5, warmup=1)
    assert run.repetitions == 5
    assert all(t > 0 for t in run.times)
    assert run.median > 0 and run.std >= 0
    with pytest.raises(ValidationError):
        bench.time_generation(FbmConfig(octaves=1, resolution=16), reps=2)


def test_run_grid_and_csv():
    runs = bench.run_grid(["zg_paper", "perlin3"], [1, 2], [16], reps=3, warmup=0)
    assert [(r.method, r.octaves) for r in runs] == [
        ("zg_paper", 1), ("perlin3", 1), ("zg_paper", 2), ("perlin3", 2)]
    lines = bench.runs_to_csv(runs).splitlines()
    assert lines[0] == "method,N,R,reps,mean_s,median_s,std_s"
    assert len(lines) == 5


def test_speedup_report():
    runs = [bench.BenchRun("zg_paper", 4, 64, [1.0, 1.0, 1.0]),
            bench.BenchRun("perlin3", 4, 64, [1.5, 1.5, 1.5]),
            bench.BenchRun("generic", 4, 64, [2.0, 2.0, 2.0])]
    rep = bench.speedup_report(runs)
    assert rep.mean_ratio("perlin3") == 1.5
    assert rep.mean_ratio("zg_paper") == 1.0
    assert all(v > 0 for v in rep.ratios.values())
    assert rep.to_csv().splitlines()[0] == "method,N,R,speedup"
    with pytest.raises(ValidationError):
        bench.speedup_report(runs[1:])


def test_cost_model_recovers_synthetic_coefficients():
    alpha, beta = 2e-9, 5e-9
    runs = [bench.BenchRun("zg_paper", n, r, [alpha * n * r * r + beta * 4.0**n] * 3)
            for n in range(1, 9) for r in (256, 512, 1024)]
    fit = bench.fit_cost_model(runs)
    assert fit.alpha == pytest.approx(alpha, rel=1e-6)
    assert fit.beta == pytest.approx(beta, rel=1e-6)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.eval_share(8, 1024) > 0.9
    assert fit.predict(1, 256) == pytest.approx(alpha * 256**2 + 4 * beta)


def test_line_fit():
    fit = bench.line_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert fit.slope == pytest.approx(2.0) and fit.intercept == pytest.approx(1.0)
    assert fit.r2 == pytest.approx(1.0)
    flat = bench.line_fit([1, 2, 3], [4.0, 4.0, 4.0])
    assert flat.r2 == 1.0 and flat.slope == pytest.approx(0.0, abs=1e-12)


def test_scaling_helpers_shape():
    runs, norm, fit = bench.octave_scaling(resolution=64, octaves=range(1, 4), reps=3, warmup=1)
    assert len(runs) == 3 and len(norm) == 3 and np.isfinite(fit.r2)
    runs, root, fit = bench.resolution_scaling(sizes=(32, 64, 128), octaves=2, reps=3, warmup=1)
    assert len(root) == 3 and all(v > 0 for v in root)


def test_non_monotonic_clock_is_fatal(monkeypatch):
    class Info:
        monotonic = False

    monkeypatch.setattr(bench.time, "get_clock_info", lambda name: Info())
    with pytest.raises(TerrainError):
        bench.time_generation(FbmConfig(octaves=1, resolution=16), reps=3)
