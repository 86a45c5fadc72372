import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyterrain import kernels2d
from polyterrain._validation import ConfigurationError, SolveError, ValidationError
from polyterrain.polycell import (
    CellConfig,
    CornerConstraintSet,
    PolyCoefficients,
    build_system,
    corner_points,
    count_constraints,
    derivative_indices,
    eval_derivative,
    fit_cell,
    hermite_1d,
    is_feasible,
    max_corner_residual,
    min_feasible_degree,
    multi_indices,
    poly_derivative,
    poly_eval,
    solve_cell,
)

PINNED = [(2, 2), (2, 3), (3, 2), (3, 3)]
# configs whose corner rows have full rank for generic data
FULL_RANK = ["D1M0N1", "D1M1N3", "D1M2N5", "D2M0N1", "D2M1N3", "D2M2N5", "D3M0N1", "D3M1N3", "D3M2N5"]


def naive_eval(coeffs, x):
    total = 0.0
    for a in multi_indices(coeffs.config.dims, coeffs.config.degree):
        term = coeffs.coeffs[a]
        for ak, xk in zip(a, x):
            term *= xk**ak
        total += term
    return total


@pytest.mark.parametrize("dims,m,expected", [(2, 1, 12), (1, 0, 2), (3, 1, 32), (2, 2, 24)])
def test_count_constraints(dims, m, expected):
    assert count_constraints(CellConfig(dims, m, 5)) == expected


@pytest.mark.parametrize("dims,m,expected", [(2, 1, 3), (2, 2, 4), (3, 2, 4), (1, 1, 3)])
def test_min_feasible_degree(dims, m, expected):
    assert min_feasible_degree(dims, m) == expected


@pytest.mark.parametrize("args,expected", [((1, 8, 1), False), ((2, 1, 3), True), ((2, 1, 2), False)])
def test_is_feasible(args, expected):
    assert is_feasible(*args) is expected


@given(st.integers(1, 4), st.integers(0, 3))
def test_min_feasible_degree_is_tight(dims, m):
    n = min_feasible_degree(dims, m)
    assert is_feasible(dims, m, n)
    assert n == 0 or not is_feasible(dims, m, n - 1)


def test_config_label_roundtrip():
    cfg = CellConfig.parse("d3m2n5")
    assert (cfg.dims, cfg.max_deriv_order, cfg.degree) == (3, 2, 5)
    assert cfg.label == "D3M2N5"
    assert cfg.n_coeffs == 216
    with pytest.raises(ValidationError):
        CellConfig.parse("D2X1")
    with pytest.raises(ValidationError):
        CellConfig(0, 1, 3)


def test_canonical_orderings():
    assert corner_points(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert derivative_indices(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert derivative_indices(2, 2)[3:] == [(2, 0), (1, 1), (0, 2)]
    assert multi_indices(2, 1) == [(0, 0), (0, 1), (1, 0), (1, 1)]


@given(st.integers(1, 3), st.integers(0, 2))
def test_constraint_set_entry_count(dims, m):
    cfg = CellConfig(dims, m, min_feasible_degree(dims, m))
    cs = CornerConstraintSet.zeros(cfg).validate()
    assert len(cs.values) == 2**dims
    assert len(cs) == count_constraints(cfg)


def test_constraint_set_validation():
    cfg = CellConfig(2, 1, 3)
    cs = CornerConstraintSet.zeros(cfg)
    del cs.values[(1, 1)]
    with pytest.raises(ValidationError):
        cs.validate()
    cs = CornerConstraintSet.zeros(cfg)
    cs.values[(0, 0)][(0, 0)] = float("nan")
    with pytest.raises(ValidationError):
        cs.validate()
    with pytest.raises(ValidationError):
        CornerConstraintSet.from_array(cfg, np.zeros((4, 2)))


def test_d2m1n3_system_shape():
    cfg = CellConfig(2, 1, 3)
    system = build_system(cfg, CornerConstraintSet.random(cfg, np.random.default_rng(0)))
    assert system.shape == (12, 16)
    assert system.rank() == 12


def test_d1m1n3_system_shape():
    cfg = CellConfig(1, 1, 3)
    cs = CornerConstraintSet.from_array(cfg, [[0.0, 0.0], [1.0, 0.0]])
    assert build_system(cfg, cs).shape == (4, 4)


def test_edge_pinning_rows_are_consistent():
    cfg = CellConfig(2, 1, 3)
    cs = CornerConstraintSet.random(cfg, np.random.default_rng(1))
    system = build_system(cfg, cs, edge_pinning=True)
    assert system.shape[0] > 12
    assert system.rank() <= 16
    coeffs = solve_cell(system)
    assert max_corner_residual(coeffs, cs) < 1e-9


def test_infeasible_config_rejected():
    cfg = CellConfig(2, 1, 2)
    with pytest.raises(ConfigurationError):
        build_system(cfg, CornerConstraintSet.zeros(cfg))


def test_smoothstep_from_solver():
    cfg = CellConfig(1, 1, 3)
    cs = CornerConstraintSet.from_array(cfg, [[0.0, 0.0], [1.0, 0.0]])
    c = fit_cell(cfg, cs)
    np.testing.assert_array_equal(c.flat, [0.0, 0.0, 3.0, -2.0])


def test_zero_constraints_give_zero_coefficients():
    cfg = CellConfig(2, 1, 3)
    c = fit_cell(cfg, CornerConstraintSet.zeros(cfg))
    assert np.all(c.flat == 0.0)


def test_solver_matches_closed_form():
    cfg = CellConfig(2, 1, 3)
    rng = np.random.default_rng(2)
    for _ in range(50):
        cs = CornerConstraintSet.random(cfg, rng)
        solved = fit_cell(cfg, cs, pinned_zero=PINNED)
        corners = [tuple(cs.values[s][d] for d in derivative_indices(2, 1))
                   for s in [(0, 0), (1, 0), (0, 1), (1, 1)]]
        closed = kernels2d.generic_coeffs(corners).c
        np.testing.assert_allclose(solved.coeffs, closed, atol=1e-9)


def test_rank_deficient_config_raises_solve_error():
    # D2M2N4: 24 constraints but corner rows have rank 20
    cfg = CellConfig(2, 2, 4)
    cs = CornerConstraintSet.random(cfg, np.random.default_rng(3))
    system = build_system(cfg, cs)
    assert system.rank() == 20
    with pytest.raises(SolveError) as err:
        solve_cell(system)
    assert err.value.max_residual > 1e-9


def test_pinned_index_validation():
    cfg = CellConfig(2, 1, 3)
    with pytest.raises(ValidationError):
        build_system(cfg, CornerConstraintSet.zeros(cfg), pinned_zero=[(4, 0)])


@pytest.mark.parametrize("label", FULL_RANK)
def test_corner_constraints_reproduced(label):
    cfg = CellConfig.parse(label)
    rng = np.random.default_rng(FULL_RANK.index(label))
    for _ in range(5):
        cs = CornerConstraintSet.random(cfg, rng)
        c = fit_cell(cfg, cs)
        assert max_corner_residual(c, cs) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(FULL_RANK), st.integers(0, 2**32 - 1))
def test_corner_constraints_property(label, seed):
    cfg = CellConfig.parse(label)
    cs = CornerConstraintSet.random(cfg, np.random.default_rng(seed))
    assert max_corner_residual(fit_cell(cfg, cs), cs) < 1e-9


def test_poly_eval_examples():
    cfg = CellConfig(2, 1, 3)
    zero = PolyCoefficients(cfg, np.zeros(16))
    assert poly_eval(zero, [0.3, 0.9]) == 0.0
    s3 = PolyCoefficients(CellConfig(1, 1, 3), [0.0, 0.0, 3.0, -2.0])
    assert poly_eval(s3, [0.5]) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_poly_eval_matches_naive(dims, degree, seed):
    rng = np.random.default_rng(seed)
    cfg = CellConfig(dims, 0, degree)
    c = PolyCoefficients(cfg, rng.normal(size=cfg.n_coeffs))
    X = rng.uniform(0, 1, size=(7, dims))
    got = poly_eval(c, X)
    want = [naive_eval(c, x) for x in X]
    np.testing.assert_allclose(got, want, atol=1e-12)
    assert poly_eval(c, X[0]) == pytest.approx(want[0], abs=1e-12)


def test_poly_eval_shape_check():
    c = PolyCoefficients(CellConfig(2, 1, 3), np.zeros(16))
    with pytest.raises(ValidationError):
        poly_eval(c, np.zeros((5, 3)))


def test_derivative_examples():
    s3 = PolyCoefficients(CellConfig(1, 1, 3), [0.0, 0.0, 3.0, -2.0])
    d = poly_derivative(s3, (1,))
    np.testing.assert_array_equal(d.flat, [0.0, 6.0, -6.0, 0.0])
    assert poly_eval(d, [0.0]) == 0.0
    cfg = CellConfig(2, 1, 3)
    xy = np.zeros(cfg.shape)
    xy[1, 1] = 2.5
    dxy = poly_derivative(PolyCoefficients(cfg, xy), (1, 1))
    assert dxy.coeffs[0, 0] == 2.5
    assert np.count_nonzero(dxy.coeffs) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_derivative_matches_finite_difference(dims, seed):
    rng = np.random.default_rng(seed)
    cfg = CellConfig(dims, 1, 3)
    c = PolyCoefficients(cfg, rng.uniform(-1, 1, size=cfg.n_coeffs))
    x = rng.uniform(0.1, 0.9, size=dims)
    step = 1e-5
    for k in range(dims):
        e = np.zeros(dims)
        e[k] = step
        fd = (poly_eval(c, x + e) - poly_eval(c, x - e)) / (2 * step)
        d = tuple(int(i == k) for i in range(dims))
        assert eval_derivative(c, d, x) == pytest.approx(fd, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_derivatives_commute(dims, seed):
    rng = np.random.default_rng(seed)
    cfg = CellConfig(dims, 0, 4)
    c = PolyCoefficients(cfg, rng.normal(size=cfg.n_coeffs))
    for i, j in itertools.combinations(range(dims), 2):
        ei = tuple(int(k == i) for k in range(dims))
        ej = tuple(int(k == j) for k in range(dims))
        a = poly_derivative(poly_derivative(c, ei), ej)
        b = poly_derivative(poly_derivative(c, ej), ei)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_hermite_1d_cubic():
    np.testing.assert_allclose(hermite_1d([0.0, 0.0], [1.0, 0.0]), [0.0, 0.0, 3.0, -2.0], atol=1e-12)
    # quintic smoothstep: zero first and second derivatives at both ends
    np.testing.assert_allclose(hermite_1d([0, 0, 0], [1, 0, 0]), [0, 0, 0, 10, -15, 6], atol=1e-10)


def _shared_edge_pair(cfg, rng):
    """Two cells sharing the x=1 / x=0 edge with identical data on it."""
    left = CornerConstraintSet.random(cfg, rng)
    right = CornerConstraintSet.random(cfg, rng)
    for y in (0, 1):
        right.values[(0, y)] = dict(left.values[(1, y)])
    return left, right


def test_edge_pinning_gives_shared_edge_values():
    cfg = CellConfig(2, 1, 3)
    rng = np.random.default_rng(4)
    t = np.linspace(0, 1, 50)
    for _ in range(20):
        left, right = _shared_edge_pair(cfg, rng)
        cl = fit_cell(cfg, left, edge_pinning=True)
        cr = fit_cell(cfg, right, edge_pinning=True)
        a = poly_eval(cl, np.column_stack([np.ones_like(t), t]))
        b = poly_eval(cr, np.column_stack([np.zeros_like(t), t]))
        np.testing.assert_allclose(a, b, atol=1e-9)


@pytest.mark.parametrize("label", ["D2M2N5", "D3M1N3"])
def test_edge_pinning_higher_configs(label):
    cfg = CellConfig.parse(label)
    cs = CornerConstraintSet.random(cfg, np.random.default_rng(5))
    c = fit_cell(cfg, cs, edge_pinning=True)
    assert max_corner_residual(c, cs) < 1e-9


def test_coefficient_csv_roundtrip():
    cfg = CellConfig(2, 1, 3)
    c = fit_cell(cfg, CornerConstraintSet.random(cfg, np.random.default_rng(6)))
    text = c.to_csv()
    assert text.splitlines()[0] == "a1,a2,coefficient"
    assert len(text.splitlines()) == 17
    back = PolyCoefficients.from_csv(text, max_deriv_order=1)
    assert back.config == cfg
    np.testing.assert_array_equal(back.coeffs, c.coeffs)


def test_constraint_count_formula_matches_enumeration():
    for dims in range(1, 5):
        for m in range(4):
            n_d = len(derivative_indices(dims, m))
            assert n_d == sum(math.comb(dims + i - 1, i) for i in range(m + 1))
