from ailfem.fem.discrete import Discretization, energy, h1_seminorm_error, residual
from ailfem.fem.quadrature import (
    CENTROID,
    DEGREE5,
    QuadratureRule,
    ScatteredQuadrature,
    graded_quadrature,
)
from ailfem.fem.space import (
    DofMap,
    FeFunction,
    build_dof_map,
    gradient_field,
    interpolate,
    prolongate,
)

__all__ = [
    "CENTROID",
    "DEGREE5",
    "Discretization",
    "DofMap",
    "FeFunction",
    "QuadratureRule",
    "ScatteredQuadrature",
    "build_dof_map",
    "energy",
    "gradient_field",
    "graded_quadrature",
    "h1_seminorm_error",
    "interpolate",
    "prolongate",
    "residual",
]
