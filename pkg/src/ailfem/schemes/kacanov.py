import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.linalg.sparse import SparseMatrix
from ailfem.schemes.base import LinearizationScheme


class KacanovScheme(LinearizationScheme):
    """Frozen coefficient ``mu(|grad u^n|^2)``."""

    def assemble(
        self, disc: Discretization, coefficients: np.ndarray
    ) -> tuple[SparseMatrix, np.ndarray]:
        weights = disc.model.mu(disc.squared_gradients(coefficients))
        return disc.assemble(weights), disc.load_vector
