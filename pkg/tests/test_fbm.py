import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyterrain import kernels2d, lattice
from polyterrain._validation import ValidationError
from polyterrain.fbm import (
    METHODS,
    FbmConfig,
    Heightmap,
    SubPixelOctaveWarning,
    evaluate_points,
    fbm_bound,
    generate_heightmap,
    generate_region,
    kernel_bound,
    make_plan,
    normalize_map,
    octave_count_for,
    render,
    zero_corner_source,
)


def pixel_centers(r, x0=0, y0=0, w=None, h=None):
    w = r if w is None else w
    h = w if h is None else h
    xs = (np.arange(x0, x0 + w) + 0.5) / r
    ys = (np.arange(y0, y0 + h) + 0.5) / r
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    return np.column_stack([X.ravel(), Y.ravel()])


def test_config_validation():
    with pytest.raises(ValidationError):
        FbmConfig(method="simplex")
    with pytest.raises(ValidationError):
        FbmConfig(octaves=0)
    with pytest.raises(ValidationError):
        FbmConfig(persistence=1.5)
    with pytest.raises(ValidationError):
        FbmConfig(frequency_ratio=1.0)
    with pytest.raises(ValidationError):
        FbmConfig(smoothstep=4)
    with pytest.raises(ValidationError):
        FbmConfig(gradient_weight=-0.1)


def test_config_schedule():
    cfg = FbmConfig(base_amplitude=2.0, persistence=0.5, base_frequency=3, frequency_ratio=2.0)
    assert cfg.amplitude(2) == 0.5
    assert cfg.cells_across(3) == 24
    assert cfg.w == 0.02
    assert replace(cfg, gradient_weight=0.3).w == 0.3
    assert FbmConfig(method="perlin5").order == 5
    assert FbmConfig(method="zg_separable").variant == "separable"


def test_single_octave_equals_direct_cell_evaluation():
    cfg = FbmConfig(seed=3, method="zg_paper", octaves=1, resolution=16, base_frequency=2)
    data = generate_heightmap(cfg).data
    h = lattice.corner_heights(3, 0, *np.meshgrid(np.arange(3), np.arange(3), indexing="xy"))
    h = h.reshape(3, 3)
    expected = np.empty((16, 16))
    for r in range(16):
        for c in range(16):
            u, v = (c + 0.5) * 2 / 16, (r + 0.5) * 2 / 16
            cx, cy = int(u), int(v)
            p = kernels2d.zg_params(h[cy, cx], h[cy, cx + 1], h[cy + 1, cx], h[cy + 1, cx + 1])
            expected[r, c] = kernels2d.zg_eval(p, u - cx, v - cy)
    np.testing.assert_allclose(data, expected, atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_render_matches_point_oracle(method):
    cfg = FbmConfig(seed=5, method=method, octaves=4, resolution=64, persistence=0.6)
    data = generate_heightmap(cfg).data
    ref = evaluate_points(cfg, pixel_centers(64)).reshape(64, 64)
    np.testing.assert_allclose(data, ref, atol=1e-13)


@pytest.mark.parametrize("method", METHODS)
def test_zero_lattice_gives_zero_map(method):
    cfg = FbmConfig(method=method, octaves=3, resolution=32, persistence=0.9)
    assert not generate_heightmap(cfg, corner_source=zero_corner_source).data.any()


@pytest.mark.parametrize("method", METHODS)
def test_amplitude_bound(method):
    cfg = FbmConfig(seed=1, method=method, octaves=5, resolution=128, gradient_weight=0.5)
    data = generate_heightmap(cfg).data
    assert np.abs(data).max() <= fbm_bound(cfg)


def test_kernel_bounds_are_sane():
    assert kernel_bound("zg_paper") >= 1.0
    assert kernel_bound("zg_separable") >= 1.0
    assert 0.0 < kernel_bound("perlin3") < 2.0
    assert kernel_bound("generic", w=0.0) == pytest.approx(kernel_bound("zg_paper"), rel=1e-12)


@pytest.mark.parametrize("method", ["zg_paper", "generic", "perlin3"])
def test_octave_decay(method):
    base = FbmConfig(seed=8, method=method, resolution=128, persistence=0.5)
    k = kernel_bound(method, base.w, base.smoothstep)
    prev = generate_heightmap(replace(base, octaves=1)).data
    for n in range(1, 6):
        cur = generate_heightmap(replace(base, octaves=n + 1)).data
        assert np.abs(cur - prev).max() <= base.base_amplitude * base.persistence**n * k
        prev = cur


@pytest.mark.parametrize("method", METHODS)
def test_determinism(method):
    cfg = FbmConfig(seed=12, method=method, octaves=5, resolution=96)
    np.testing.assert_array_equal(generate_heightmap(cfg).data, generate_heightmap(cfg).data)


def test_thread_count_does_not_change_output():
    cfg = FbmConfig(seed=2, method="zg_paper", octaves=4, resolution=64)
    serial = generate_heightmap(cfg, threads=1).data
    parallel = generate_heightmap(cfg, threads=3).data
    np.testing.assert_array_equal(serial, parallel)


def test_env_thread_override(monkeypatch):
    from polyterrain import fbm

    monkeypatch.setenv("TERRAIN_THREADS", "2")
    assert fbm.default_threads() == 2
    monkeypatch.setenv("TERRAIN_THREADS", "many")
    with pytest.raises(ValidationError):
        fbm.default_threads()
    monkeypatch.delenv("TERRAIN_THREADS")
    assert fbm.default_threads() == 1


def test_different_seeds_differ():
    a = generate_heightmap(FbmConfig(seed=0, octaves=3, resolution=32)).data
    b = generate_heightmap(FbmConfig(seed=1, octaves=3, resolution=32)).data
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("method", METHODS)
def test_four_region_tiling_is_bit_exact(method):
    cfg = FbmConfig(seed=21, method=method, octaves=6, resolution=128)
    full = generate_heightmap(cfg).data
    for x0 in (0, 64):
        for y0 in (0, 64):
            tile = generate_region(cfg, (x0, y0), 64).data
            np.testing.assert_array_equal(tile, full[y0:y0 + 64, x0:x0 + 64])


def test_region_tiling_1024():
    cfg = FbmConfig(seed=4, method="zg_paper", octaves=8, resolution=1024)
    full = generate_heightmap(cfg).data
    for x0 in (0, 512):
        for y0 in (0, 512):
            np.testing.assert_array_equal(generate_region(cfg, (x0, y0), 512).data,
                                          full[y0:y0 + 512, x0:x0 + 512])


def test_region_whole_map_and_neighbours():
    cfg = FbmConfig(seed=6, method="perlin5", octaves=4, resolution=64)
    full = generate_heightmap(cfg)
    np.testing.assert_array_equal(generate_region(cfg).data, full.data)
    left = generate_region(cfg, (0, 0), (32, 64)).data
    right = generate_region(cfg, (32, 0), (32, 64)).data
    np.testing.assert_array_equal(np.hstack([left, right]), full.data)


def test_region_outside_map_is_continuous():
    # the field extends past the unit square; a region beyond it still lines up with its neighbour
    cfg = FbmConfig(seed=6, octaves=3, resolution=64)
    wide = generate_region(cfg, (64, 0), (64, 64)).data
    pts = pixel_centers(64, 64, 0, 64, 64)
    np.testing.assert_allclose(wide.ravel(), evaluate_points(cfg, pts), atol=1e-13)


def test_region_alignment_checked():
    cfg = FbmConfig(resolution=64)
    with pytest.raises(ValidationError):
        generate_region(cfg, (5, 0), 16)


def test_sub_pixel_warning():
    with pytest.warns(SubPixelOctaveWarning):
        make_plan(FbmConfig(octaves=6, resolution=32))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        make_plan(FbmConfig(octaves=5, resolution=32))


def test_octave_count_for():
    assert octave_count_for(512) == 9
    assert octave_count_for(4) == 2


def test_render_reuses_buffer_and_overrides_seed():
    cfg = FbmConfig(seed=0, octaves=3, resolution=32)
    plan = make_plan(cfg)
    buf = np.full((32, 32), 7.0)
    out, times = render(plan, out=buf, seed=9)
    assert out is buf and len(times) == 3
    np.testing.assert_array_equal(out, generate_heightmap(replace(cfg, seed=9)).data)
    with pytest.raises(ValidationError):
        render(plan, out=np.zeros((8, 8)))


def test_normalize_examples():
    hm = Heightmap(np.array([[-2.0, 0.0], [1.0, 2.0]]))
    n = normalize_map(hm)
    assert n.data.min() == -1.0 and n.data.max() == 1.0
    assert n.normalized and n.original_range == (-2.0, 2.0)
    const = normalize_map(Heightmap(np.full((3, 3), 0.4)))
    assert const.constant
    np.testing.assert_array_equal(const.data, 0.4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalize_idempotent(seed):
    data = np.random.default_rng(seed).normal(size=(8, 8))
    once = normalize_map(Heightmap(data))
    twice = normalize_map(once)
    np.testing.assert_array_equal(once.data, twice.data)
    assert twice.original_range == once.original_range


def test_generate_normalized_flag():
    hm = generate_heightmap(FbmConfig(octaves=3, resolution=32, normalize=True))
    assert hm.normalized
    assert hm.data.min() == -1.0 and hm.data.max() == 1.0


def test_heightmap_metadata():
    hm = generate_heightmap(FbmConfig(octaves=3, resolution=32))
    assert hm.shape == (32, 32) and hm.resolution == 32
    assert len(hm.octave_times) == 3 and hm.total_time > 0


def test_evaluate_points_validation():
    with pytest.raises(ValidationError):
        evaluate_points(FbmConfig(), np.zeros((4, 3)))
    assert evaluate_points(FbmConfig(), np.zeros((0, 2))).shape == (0,)
