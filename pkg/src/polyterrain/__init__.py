"""Boundary-constrained polynomial cell noise for procedural terrain."""

from ._validation import (
    ConfigurationError,
    EmptyMaskError,
    NumericalError,
    SolveError,
    TerrainError,
    ValidationError,
)
from .estimators import BoxCountingDimension, CellPolynomial, FbmTerrain
from .fbm import (
    METHODS,
    FbmConfig,
    Heightmap,
    evaluate_points,
    generate_heightmap,
    generate_region,
    normalize_map,
)
from .polycell import (
    CellConfig,
    CornerConstraintSet,
    build_system,
    count_constraints,
    is_feasible,
    min_feasible_degree,
    solve_cell,
)

__version__ = "0.1.0"

__all__ = [
    "BoxCountingDimension",
    "CellConfig",
    "CellPolynomial",
    "ConfigurationError",
    "CornerConstraintSet",
    "EmptyMaskError",
    "FbmConfig",
    "FbmTerrain",
    "Heightmap",
    "METHODS",
    "NumericalError",
    "SolveError",
    "TerrainError",
    "ValidationError",
    "build_system",
    "count_constraints",
    "evaluate_points",
    "generate_heightmap",
    "generate_region",
    "is_feasible",
    "min_feasible_degree",
    "normalize_map",
    "solve_cell",
]
