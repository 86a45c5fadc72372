"""Boundary-constrained polynomials on the unit hypercube.

A cell polynomial in ``D`` dimensions has the dense tensor form

    h(X) = sum_a c_a * prod_k x_k ** a_k,    0 <= a_k <= n,

and is determined by imposing heights and mixed partial derivatives (up to
total order ``m``) at the ``2**D`` corners of ``[0, 1]**D``.  A configuration
is labelled ``DdMmNn``.

Coefficients are stored as a numpy array of shape ``(n + 1,) * D``; the
flattened (C-order) layout is row-major over exponent tuples in
lexicographic order, which is also the column order of every constraint
matrix and of the CSV export.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConfigurationError, SolveError, ValidationError

SOLVE_TOL = 1e-9


@dataclass(frozen=True)
class CellConfig:
    """A ``DdMmNn`` cell configuration."""

    dims: int
    max_deriv_order: int
    degree: int

    def __post_init__(self):
        for name, lo in (("dims", 1), ("max_deriv_order", 0), ("degree", 0)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
                raise ValidationError(f"{name} must be an integer >= {lo}, got {v!r}")

    @classmethod
    def parse(cls, label):
        """Build a config from a label such as ``"D2M1N3"``."""
        s = label.strip().upper()
        try:
            d_part, rest = s[1:].split("M")
            m_part, n_part = rest.split("N")
            return cls(int(d_part), int(m_part), int(n_part))
        except (ValueError, IndexError):
            raise ValidationError(f"not a DdMmNn label: {label!r}") from None

    @property
    def label(self):
        return f"D{self.dims}M{self.max_deriv_order}N{self.degree}"

    @property
    def n_coeffs(self):
        return (self.degree + 1) ** self.dims

    @property
    def shape(self):
        return (self.degree + 1,) * self.dims

    @property
    def feasible(self):
        return is_feasible(self.dims, self.max_deriv_order, self.degree)

    def __str__(self):
        return self.label


def derivatives_per_corner(dims, m):
    """Number of distinct mixed derivatives of total order 0..m."""
    return sum(math.comb(dims + i - 1, i) for i in range(m + 1))


def count_constraints(config):
    """Total number of corner constraints for ``config``."""
    return 2**config.dims * derivatives_per_corner(config.dims, config.max_deriv_order)


def is_feasible(dims, m, n):
    """True when the constraint count does not exceed the coefficient count."""
    return 2**dims * derivatives_per_corner(dims, m) <= (n + 1) ** dims


def min_feasible_degree(dims, m):
    """Smallest per-axis degree ``n`` for which ``DdimsMmNn`` is feasible."""
    if dims < 1 or m < 0:
        raise ValidationError("need dims >= 1 and m >= 0")
    n = 0
    while not is_feasible(dims, m, n):
        n += 1
    return n


def multi_indices(dims, degree):
    """All exponent tuples in lexicographic (row-major) order."""
    return list(itertools.product(range(degree + 1), repeat=dims))


def corner_points(dims):
    """Cell corners in lexicographic order, e.g. (0,0), (0,1), (1,0), (1,1)."""
    return list(itertools.product((0, 1), repeat=dims))


def derivative_indices(dims, m):
    """Derivative multi-indices with total order <= m.

    Grouped by total order; within an order, lexicographically descending so
    that for D=2, m=1 the order is value, d/dx, d/dy.
    """
    out = []
    for order in range(m + 1):
        group = [d for d in itertools.product(range(order + 1), repeat=dims) if sum(d) == order]
        out.extend(sorted(group, reverse=True))
    return out


@dataclass
class CornerConstraintSet:
    """Imposed corner values: ``values[corner][d]`` is the mixed derivative ``d`` at ``corner``."""

    config: CellConfig
    values: dict = field(default_factory=dict)

    def validate(self):
        cfg = self.config
        corners = set(corner_points(cfg.dims))
        derivs = set(derivative_indices(cfg.dims, cfg.max_deriv_order))
        if set(self.values) != corners:
            raise ValidationError(
                f"expected {len(corners)} corners, got {len(self.values)}"
            )
        for s, entries in self.values.items():
            if set(entries) != derivs:
                raise ValidationError(
                    f"corner {s}: expected derivative set of size {len(derivs)}, "
                    f"got {len(entries)}"
                )
            for d, v in entries.items():
                if not math.isfinite(v):
                    raise ValidationError(f"corner {s}, derivative {d}: non-finite value")
        return self

    def __len__(self):
        return sum(len(v) for v in self.values.values())

    def to_array(self):
        """Values as a (corners, derivatives) array in canonical order."""
        cfg = self.config
        derivs = derivative_indices(cfg.dims, cfg.max_deriv_order)
        return np.array(
            [[self.values[s][d] for d in derivs] for s in corner_points(cfg.dims)],
            dtype=float,
        )

    @classmethod
    def from_array(cls, config, arr):
        derivs = derivative_indices(config.dims, config.max_deriv_order)
        corners = corner_points(config.dims)
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (len(corners), len(derivs)):
            raise ValidationError(
                f"expected array of shape {(len(corners), len(derivs))}, got {arr.shape}"
            )
        values = {s: {d: float(arr[i, j]) for j, d in enumerate(derivs)} for i, s in enumerate(corners)}
        return cls(config, values)

    @classmethod
    def random(cls, config, rng, scale=1.0):
        n_c = 2**config.dims
        n_d = derivatives_per_corner(config.dims, config.max_deriv_order)
        return cls.from_array(config, rng.uniform(-scale, scale, size=(n_c, n_d)))

    @classmethod
    def zeros(cls, config):
        n_d = derivatives_per_corner(config.dims, config.max_deriv_order)
        return cls.from_array(config, np.zeros((2**config.dims, n_d)))


@dataclass
class PolyCoefficients:
    """Dense coefficients of one cell polynomial."""

    config: CellConfig
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.size != self.config.n_coeffs:
            raise ValidationError(
                f"expected {self.config.n_coeffs} coefficients, got {self.coeffs.size}"
            )
        self.coeffs = self.coeffs.reshape(self.config.shape)

    def __call__(self, X):
        return poly_eval(self, X)

    def __getitem__(self, index):
        return self.coeffs[tuple(index)]

    @property
    def flat(self):
        return self.coeffs.reshape(-1)

    def derivative(self, d):
        return poly_derivative(self, d)

    def to_csv(self, fp=None):
        """Write ``a_1, ..., a_D, coefficient`` rows; returns the text when ``fp`` is None."""
        buf = io.StringIO() if fp is None else fp
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"a{k + 1}" for k in range(self.config.dims)] + ["coefficient"])
        for a in multi_indices(self.config.dims, self.config.degree):
            w.writerow(list(a) + [repr(float(self.coeffs[a]))])
        if fp is None:
            return buf.getvalue()
        return None

    @classmethod
    def from_csv(cls, text, max_deriv_order=0):
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        dims = len(header) - 1
        idx = [tuple(int(v) for v in r[:dims]) for r in body]
        degree = max(max(a) for a in idx)
        cfg = CellConfig(dims, max_deriv_order, degree)
        coeffs = np.zeros(cfg.shape)
        for a, r in zip(idx, body):
            coeffs[a] = float(r[dims])
        return cls(cfg, coeffs)


@dataclass
class LinearSystem:
    """Constraint rows over the monomial basis of one cell."""

    config: CellConfig
    matrix: np.ndarray
    rhs: np.ndarray
    pinned_zero: frozenset = frozenset()
    edge_pinning: bool = False
    n_corner_rows: int = 0

    @property
    def shape(self):
        return self.matrix.shape

    def rank(self):
        free = _free_columns(self)
        return int(np.linalg.matrix_rank(self.matrix[:, free]))


def _falling(a, d):
    """a * (a-1) * ... * (a-d+1), zero when d > a."""
    if d > a:
        return 0
    return math.factorial(a) // math.factorial(a - d)


def derivative_row(config, point, d):
    """Row evaluating the mixed derivative ``d`` of every basis monomial at a corner."""
    row = np.empty(config.n_coeffs)
    for col, a in enumerate(multi_indices(config.dims, config.degree)):
        v = 1.0
        for ak, dk, xk in zip(a, d, point):
            f = _falling(ak, dk)
            if f == 0:
                v = 0.0
                break
            v *= f * (xk ** (ak - dk))
        row[col] = v
    return row


def hermite_1d(values0, values1):
    """Coefficients of the degree ``2m+1`` Hermite interpolant on ``[0, 1]``.

    ``values0[j]`` and ``values1[j]`` are the j-th derivatives at 0 and 1.
    """
    m = len(values0) - 1
    cfg = CellConfig(1, m, 2 * m + 1)
    cs = CornerConstraintSet(
        cfg,
        {
            (0,): {(j,): float(values0[j]) for j in range(m + 1)},
            (1,): {(j,): float(values1[j]) for j in range(m + 1)},
        },
    )
    system = build_system(cfg, cs)
    return np.linalg.solve(system.matrix, system.rhs)


def _edge_rows(config, constraints):
    dims, m, n = config.dims, config.max_deriv_order, config.degree
    basis = multi_indices(dims, n)
    rows, rhs = [], []
    for axis in range(dims):
        others = [k for k in range(dims) if k != axis]
        for fixed in itertools.product((0, 1), repeat=dims - 1):
            s0 = [0] * dims
            for k, t in zip(others, fixed):
                s0[k] = t
            s1 = list(s0)
            s1[axis] = 1
            along = [tuple(j if k == axis else 0 for k in range(dims)) for j in range(m + 1)]
            v0 = [constraints.values[tuple(s0)][d] for d in along]
            v1 = [constraints.values[tuple(s1)][d] for d in along]
            herm = hermite_1d(v0, v1)
            for p in range(n + 1):
                row = np.zeros(config.n_coeffs)
                for col, a in enumerate(basis):
                    if a[axis] != p:
                        continue
                    # monomials carrying a power of a coordinate fixed at 0 vanish on this edge
                    if any(a[k] > 0 and t == 0 for k, t in zip(others, fixed)):
                        continue
                    row[col] = 1.0
                rows.append(row)
                rhs.append(herm[p] if p < len(herm) else 0.0)
    return rows, rhs


def build_system(config, constraints, edge_pinning=False, pinned_zero=()):
    """Assemble the linear system for ``config`` under ``constraints``.

    With ``edge_pinning``, each edge-restricted polynomial is additionally
    forced to equal the 1D Hermite interpolant of its two corners, so values
    on an edge depend only on the data at its endpoints.
    """
    if not is_feasible(config.dims, config.max_deriv_order, config.degree):
        raise ConfigurationError(
            f"{config.label} is infeasible: {count_constraints(config)} constraints "
            f"> {config.n_coeffs} coefficients"
        )
    if constraints.config != config:
        raise ValidationError("constraint set belongs to a different configuration")
    constraints.validate()

    pinned = frozenset(tuple(int(v) for v in a) for a in pinned_zero)
    for a in pinned:
        if len(a) != config.dims or not all(0 <= v <= config.degree for v in a):
            raise ValidationError(f"pinned index {a} is not a valid multi-index")

    rows, rhs = [], []
    for s in corner_points(config.dims):
        for d in derivative_indices(config.dims, config.max_deriv_order):
            rows.append(derivative_row(config, s, d))
            rhs.append(constraints.values[s][d])
    n_corner = len(rows)
    if edge_pinning:
        er, eb = _edge_rows(config, constraints)
        rows.extend(er)
        rhs.extend(eb)
    return LinearSystem(
        config=config,
        matrix=np.array(rows),
        rhs=np.array(rhs, dtype=float),
        pinned_zero=pinned,
        edge_pinning=edge_pinning,
        n_corner_rows=n_corner,
    )


def _free_columns(system):
    basis = multi_indices(system.config.dims, system.config.degree)
    return np.array([a not in system.pinned_zero for a in basis])


def _solve_free(A, b):
    # LU for square well-posed systems keeps exact data exact; SVD otherwise
    if A.shape[0] == A.shape[1]:
        try:
            if np.linalg.cond(A) < 1e12:
                return np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            pass
    return np.linalg.lstsq(A, b, rcond=None)[0]


def solve_cell(system, tol=SOLVE_TOL):
    """Minimum-norm coefficients satisfying every row, pinned coefficients held at zero.

    Raises :class:`SolveError` when the best least-squares fit leaves a
    residual above ``tol``.
    """
    free = _free_columns(system)
    sol = np.zeros(system.config.n_coeffs)
    if free.any():
        A = system.matrix[:, free]
        sol[free] = _solve_free(A, system.rhs)
    residual = system.matrix @ sol - system.rhs
    worst = float(np.max(np.abs(residual))) if residual.size else 0.0
    if not worst < tol:
        raise SolveError(
            f"{system.config.label} constraints are inconsistent: max residual {worst:.3e}",
            max_residual=worst,
        )
    return PolyCoefficients(system.config, sol)


def fit_cell(config, constraints, edge_pinning=False, pinned_zero=()):
    """build_system followed by solve_cell."""
    return solve_cell(build_system(config, constraints, edge_pinning, pinned_zero))


def poly_eval(coeffs, X):
    """Evaluate at one point (shape ``(D,)``) or many (shape ``(..., D)``).

    Contracts the coefficient tensor one axis at a time, first axis first.
    """
    cfg = coeffs.config
    X = np.asarray(X, dtype=float)
    if X.shape[-1:] != (cfg.dims,):
        raise ValidationError(f"expected points with {cfg.dims} coordinates, got shape {X.shape}")
    powers = np.arange(cfg.degree + 1)
    out = coeffs.coeffs
    lead = X.shape[:-1]
    if lead:
        out = np.broadcast_to(out, lead + out.shape)
    for k in range(cfg.dims):
        v = X[..., k, None] ** powers
        out = _contract_first(out, v, len(lead))
    return float(out) if not lead else out


def _contract_first(tensor, v, n_lead):
    # sum over the first coefficient axis (position n_lead) against v[..., i]
    moved = np.moveaxis(tensor, n_lead, -1)
    shape = v.shape[:n_lead] + (1,) * (moved.ndim - n_lead - 1) + v.shape[-1:]
    return np.sum(moved * v.reshape(shape), axis=-1)


def poly_derivative(coeffs, d):
    """Coefficients of the mixed partial derivative ``d``.

    The result keeps the original shape; vacated high-order slots are zero.
    """
    cfg = coeffs.config
    d = tuple(int(v) for v in d)
    if len(d) != cfg.dims or any(v < 0 for v in d):
        raise ValidationError(f"derivative index {d} does not match {cfg.dims} dimensions")
    out = coeffs.coeffs.copy()
    n = cfg.degree
    for axis, dk in enumerate(d):
        if dk == 0:
            continue
        shifted = np.zeros_like(out)
        if dk <= n:
            factors = np.array([_falling(a + dk, dk) for a in range(n + 1 - dk)], dtype=float)
            src = [slice(None)] * cfg.dims
            dst = [slice(None)] * cfg.dims
            src[axis] = slice(dk, None)
            dst[axis] = slice(0, n + 1 - dk)
            fshape = [1] * cfg.dims
            fshape[axis] = n + 1 - dk
            shifted[tuple(dst)] = out[tuple(src)] * factors.reshape(fshape)
        out = shifted
    return PolyCoefficients(cfg, out)


def eval_derivative(coeffs, d, X):
    return poly_eval(poly_derivative(coeffs, d), X)


def max_corner_residual(coeffs, constraints):
    """Largest deviation from the imposed corner data, over all corners and derivatives."""
    worst = 0.0
    for s, entries in constraints.values.items():
        for d, v in entries.items():
            worst = max(worst, abs(eval_derivative(coeffs, d, s) - v))
    return worst
