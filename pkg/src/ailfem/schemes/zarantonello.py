import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.linalg.sparse import SparseMatrix
from ailfem.schemes.base import LinearizationScheme


class ZarantonelloScheme(LinearizationScheme):
    """Riesz-preconditioned gradient step ``u - delta_z * K^{-1} r(u)``."""

    def assemble(
        self, disc: Discretization, coefficients: np.ndarray
    ) -> tuple[SparseMatrix, np.ndarray]:
        stiffness = disc.stiffness
        rhs = stiffness @ coefficients - self.spec.delta_z * disc.residual(coefficients)
        return stiffness, rhs
