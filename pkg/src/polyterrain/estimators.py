"""scikit-learn style wrappers.

``FbmTerrain`` is a stateless transformer mapping map coordinates to fBm
heights; ``BoxCountingDimension`` fits a coastline dimension to a map or
mask; ``CellPolynomial`` fits one boundary-constrained cell polynomial to
corner data and predicts values inside the cell.  All expose
``get_params``/``set_params`` and so work with ``clone``, pipelines and
grid searches.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import analysis, polycell
from ._validation import ValidationError
from .fbm import FbmConfig, Heightmap, evaluate_points, generate_heightmap, generate_region


class FbmTerrain(TransformerMixin, BaseEstimator):
    """Fractal heightmap generator.

    Parameters mirror :class:`polyterrain.fbm.FbmConfig`.  ``fit`` only
    validates them; ``transform`` evaluates the field at ``(x, y)`` map
    coordinates (the map covers ``[0, 1]**2``) and returns a single column.
    """

    def __init__(self, method="zg_paper", octaves=8, resolution=512, base_frequency=2,
                 frequency_ratio=2.0, persistence=0.5, base_amplitude=1.0,
                 gradient_weight=None, smoothstep=3, normalize=False, seed=0):
        self.method = method
        self.octaves = octaves
        self.resolution = resolution
        self.base_frequency = base_frequency
        self.frequency_ratio = frequency_ratio
        self.persistence = persistence
        self.base_amplitude = base_amplitude
        self.gradient_weight = gradient_weight
        self.smoothstep = smoothstep
        self.normalize = normalize
        self.seed = seed

    def fit(self, X=None, y=None):
        self.config_ = FbmConfig(**self.get_params())
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValidationError(f"expected (x, y) columns, got {X.shape[1]} features")
        return evaluate_points(self.config_, X)[:, None]

    def generate(self):
        """Full ``R x R`` :class:`Heightmap`."""
        check_is_fitted(self, "config_")
        return generate_heightmap(self.config_)

    def generate_region(self, origin, extent):
        check_is_fitted(self, "config_")
        return generate_region(self.config_, origin, extent)


class BoxCountingDimension(BaseEstimator):
    """Coastline box-counting dimension of a heightmap or boolean mask.

    Attributes after ``fit``: ``dimension_``, ``prefactor_``, ``r2_``,
    ``report_`` (:class:`~polyterrain.analysis.BoxCountReport`) and
    ``coastline_`` (None when a mask was given directly).
    """

    def __init__(self, sizes=analysis.DEFAULT_BOX_SIZES, sea_level="median"):
        self.sizes = sizes
        self.sea_level = sea_level

    def fit(self, X, y=None):
        if isinstance(X, Heightmap):
            X = X.data
        X = np.asarray(X)
        if X.dtype == bool:
            self.coastline_ = None
            mask = X
        else:
            X = check_array(X, dtype=np.float64)
            self.coastline_ = analysis.coastline_mask(X, self.sea_level)
            mask = self.coastline_.mask
        self.report_ = analysis.box_count(mask, self.sizes)
        self.dimension_ = self.report_.dimension
        self.prefactor_ = self.report_.prefactor
        self.r2_ = self.report_.r2
        return self


class CellPolynomial(RegressorMixin, BaseEstimator):
    """One ``DdMmNn`` cell polynomial fitted to corner constraints.

    ``fit`` takes a :class:`~polyterrain.polycell.CornerConstraintSet` or an
    array of shape ``(2**D, derivatives_per_corner)`` in canonical order;
    ``degree=None`` picks the smallest feasible degree.  ``predict`` takes
    points of shape ``(n, D)`` inside the unit cell.
    """

    def __init__(self, dims=2, max_deriv_order=1, degree=None, edge_pinning=False, pinned_zero=()):
        self.dims = dims
        self.max_deriv_order = max_deriv_order
        self.degree = degree
        self.edge_pinning = edge_pinning
        self.pinned_zero = pinned_zero

    def _config(self):
        n = self.degree
        if n is None:
            n = polycell.min_feasible_degree(self.dims, self.max_deriv_order)
        return polycell.CellConfig(self.dims, self.max_deriv_order, n)

    def fit(self, X, y=None):
        cfg = self._config()
        if isinstance(X, polycell.CornerConstraintSet):
            constraints = X
        else:
            constraints = polycell.CornerConstraintSet.from_array(cfg, check_array(X, dtype=np.float64))
        system = polycell.build_system(cfg, constraints, self.edge_pinning, self.pinned_zero)
        self.coef_ = polycell.solve_cell(system)
        self.config_ = cfg
        self.n_constraints_ = system.n_corner_rows
        self.rank_ = system.rank()
        self.n_features_in_ = cfg.dims
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return polycell.poly_eval(self.coef_, X)

    def derivative(self, d):
        check_is_fitted(self, "coef_")
        return polycell.poly_derivative(self.coef_, d)
