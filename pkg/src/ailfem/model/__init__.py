from ailfem.model.manufactured import (
    BUBBLE_LINEAR_ENERGY,
    ManufacturedSolution,
    exact_gradient,
    exact_value,
    load_g,
    lshape_solution,
    polar_value,
    square_polynomial_solution,
)
from ailfem.model.problem import (
    MODELS,
    DomainError,
    NonlinearModel,
    default_model,
    linear_model,
    model_by_name,
)

__all__ = [
    "BUBBLE_LINEAR_ENERGY",
    "MODELS",
    "DomainError",
    "ManufacturedSolution",
    "NonlinearModel",
    "default_model",
    "exact_gradient",
    "exact_value",
    "linear_model",
    "load_g",
    "lshape_solution",
    "model_by_name",
    "polar_value",
    "square_polynomial_solution",
]
