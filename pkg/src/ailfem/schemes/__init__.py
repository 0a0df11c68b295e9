import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.fem.space import FeFunction
from ailfem.linalg.sparse import DEFAULT_REL_TOL, SparseMatrix
from ailfem.schemes.base import (
    SCHEME_KINDS,
    LinearizationScheme,
    SchemeSpec,
    StepFailure,
    StepResult,
)
from ailfem.schemes.kacanov import KacanovScheme
from ailfem.schemes.newton import NewtonScheme
from ailfem.schemes.zarantonello import ZarantonelloScheme

_SCHEMES: dict[str, type[LinearizationScheme]] = {
    "zarantonello": ZarantonelloScheme,
    "kacanov": KacanovScheme,
    "newton": NewtonScheme,
}


def build_scheme(spec: SchemeSpec) -> LinearizationScheme:
    return _SCHEMES[spec.kind](spec)


def assemble_linearized(
    spec: SchemeSpec, disc: Discretization, u: FeFunction
) -> tuple[SparseMatrix, np.ndarray]:
    spec.validate_for(disc.model)
    return build_scheme(spec).assemble(disc, u.coefficients)


def linearization_step(
    spec: SchemeSpec,
    disc: Discretization,
    u: FeFunction,
    rel_tol: float = DEFAULT_REL_TOL,
) -> StepResult:
    spec.validate_for(disc.model)
    return build_scheme(spec).step(disc, u, rel_tol)


__all__ = [
    "SCHEME_KINDS",
    "KacanovScheme",
    "LinearizationScheme",
    "NewtonScheme",
    "SchemeSpec",
    "StepFailure",
    "StepResult",
    "ZarantonelloScheme",
    "assemble_linearized",
    "build_scheme",
    "linearization_step",
]
