"""
Per-mesh discretization of the energy minimization problem.

``Discretization`` caches everything on a mesh that does not depend on the
iterate: quadrature points, load values and the load vector, the squared
load norms used by the estimator, exact gradients for error norms and the
plain stiffness matrix. Terms involving the P1 iterate have piecewise
constant integrands and are integrated exactly.
"""

from collections.abc import Callable
from functools import cached_property

import numpy as np

from ailfem.fem.quadrature import DEGREE5, QuadratureRule
from ailfem.fem.space import DofMap, FeFunction, build_dof_map, combine_gradients
from ailfem.linalg.sparse import SparseMatrix, assemble_coo
from ailfem.mesh.mesh import Mesh
from ailfem.model.manufactured import ManufacturedSolution
from ailfem.model.problem import NonlinearModel

PointMap = Callable[[np.ndarray], np.ndarray]


class Discretization:
    def __init__(
        self,
        mesh: Mesh,
        model: NonlinearModel,
        load: PointMap,
        exact_gradient: PointMap | None = None,
        *,
        rule: QuadratureRule = DEGREE5,
        dofmap: DofMap | None = None,
    ):
        self.mesh = mesh
        self.model = model
        self.load = load
        self.exact_gradient = exact_gradient
        self.rule = rule
        self.dofmap = build_dof_map(mesh) if dofmap is None else dofmap

    @classmethod
    def from_solution(
        cls, mesh: Mesh, solution: ManufacturedSolution, **kwargs
    ) -> "Discretization":
        return cls(mesh, solution.model, solution.load, solution.gradient, **kwargs)

    @property
    def n_dofs(self) -> int:
        return self.dofmap.n_dofs

    def zero(self) -> FeFunction:
        return FeFunction(self.mesh, self.dofmap, np.zeros(self.n_dofs))

    def function(self, coefficients: np.ndarray) -> FeFunction:
        return FeFunction(self.mesh, self.dofmap, coefficients)

    # ------------------------------------------------------------------
    # Cached mesh data
    # ------------------------------------------------------------------

    @cached_property
    def element_dofs(self) -> np.ndarray:
        """(n_elements, 3) dof of each local vertex, -1 on the boundary."""
        return self.dofmap.vertex_to_dof[self.mesh.elements]

    @cached_property
    def quadrature_points(self) -> np.ndarray:
        return self.rule.points(self.mesh.corners)

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Absolute weights, shape (n_elements, n_points)."""
        return self.mesh.areas[:, None] * self.rule.weights[None, :]

    @cached_property
    def load_values(self) -> np.ndarray:
        return np.asarray(self.load(self.quadrature_points), dtype=np.float64)

    @cached_property
    def load_vector(self) -> np.ndarray:
        """``(g, phi_i)`` for every dof."""
        local = (self.quadrature_weights * self.load_values) @ self.rule.barycentric
        return self._scatter(local)

    @cached_property
    def load_l2_squared(self) -> np.ndarray:
        """``int_T g^2`` per element."""
        return np.sum(self.quadrature_weights * self.load_values**2, axis=1)

    @cached_property
    def exact_gradients(self) -> np.ndarray:
        if self.exact_gradient is None:
            raise ValueError("no exact gradient available for this discretization")
        return np.asarray(self.exact_gradient(self.quadrature_points), dtype=np.float64)

    @cached_property
    def stiffness(self) -> SparseMatrix:
        return self.assemble(np.ones(self.mesh.n_elements))

    # ------------------------------------------------------------------
    # Assembly
    # ------------------------------------------------------------------

    def assemble(
        self,
        weights: np.ndarray,
        rank_one: np.ndarray | None = None,
        directions: np.ndarray | None = None,
    ) -> SparseMatrix:
        """Matrix of ``sum_T |T| (c_T G_i.G_j + d_T (q_T.G_i)(q_T.G_j))`` over free dofs."""
        grads = self.mesh.basis_gradients
        local = weights[:, None, None] * np.einsum("eid,ejd->eij", grads, grads)
        if rank_one is not None:
            projected = np.einsum("eid,ed->ei", grads, directions)
            local = local + rank_one[:, None, None] * (
                projected[:, :, None] * projected[:, None, :]
            )
        local = self.mesh.areas[:, None, None] * local

        dofs = self.element_dofs
        rows = np.broadcast_to(dofs[:, :, None], local.shape)
        cols = np.broadcast_to(dofs[:, None, :], local.shape)
        keep = (rows >= 0) & (cols >= 0)
        return assemble_coo(
            rows[keep], cols[keep], local[keep], self.n_dofs, symmetrize=True
        )

    def _scatter(self, local: np.ndarray) -> np.ndarray:
        dofs = self.element_dofs.ravel()
        keep = dofs >= 0
        return np.bincount(
            dofs[keep], weights=local.ravel()[keep], minlength=self.n_dofs
        ).astype(np.float64)

    # ------------------------------------------------------------------
    # Functionals of the iterate
    # ------------------------------------------------------------------

    def gradients(self, coefficients: np.ndarray) -> np.ndarray:
        nodal = np.zeros(self.mesh.n_vertices)
        nodal[self.dofmap.dof_to_vertex] = coefficients
        return combine_gradients(nodal[self.mesh.elements], self.mesh.basis_gradients)

    def squared_gradients(self, coefficients: np.ndarray) -> np.ndarray:
        grads = self.gradients(coefficients)
        return np.sum(grads * grads, axis=1)

    def residual(self, coefficients: np.ndarray) -> np.ndarray:
        """``int mu(|grad u|^2) grad u . grad phi_i - (g, phi_i)``."""
        flux = self.model.flux(self.gradients(coefficients))
        local = self.mesh.areas[:, None] * np.einsum(
            "ed,ekd->ek", flux, self.mesh.basis_gradients
        )
        return self._scatter(local) - self.load_vector

    def energy(self, coefficients: np.ndarray) -> float:
        """``int psi(|grad u|^2) - (g, u)``."""
        psi = self.model.psi(self.squared_gradients(coefficients))
        return float(np.sum(self.mesh.areas * psi) - self.load_vector @ coefficients)

    def x_norm(self, coefficients: np.ndarray) -> float:
        """``||grad v||_{L^2}``."""
        return float(np.sqrt(np.sum(self.mesh.areas * self.squared_gradients(coefficients))))

    def h1_error(self, coefficients: np.ndarray) -> float:
        diff = self.exact_gradients - self.gradients(coefficients)[:, None, :]
        return float(np.sqrt(np.sum(self.quadrature_weights * np.sum(diff * diff, axis=2))))


def residual(disc: Discretization, u: FeFunction) -> np.ndarray:
    return disc.residual(_coefficients_on(disc, u))


def energy(disc: Discretization, u: FeFunction) -> float:
    return disc.energy(_coefficients_on(disc, u))


def h1_seminorm_error(disc: Discretization, u: FeFunction) -> float:
    return disc.h1_error(_coefficients_on(disc, u))


def _coefficients_on(disc: Discretization, u: FeFunction) -> np.ndarray:
    if u.mesh is not disc.mesh:
        raise ValueError("function is defined on a different mesh")
    return u.coefficients
