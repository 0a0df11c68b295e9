"""
P1 functions with zero trace.
"""

from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from matplotlib.tri import Triangulation

from ailfem.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class DofMap:
    vertex_to_dof: np.ndarray  # (n_vertices,), -1 on the boundary
    dof_to_vertex: np.ndarray  # (n_dofs,), ascending

    @property
    def n_dofs(self) -> int:
        return len(self.dof_to_vertex)


@dataclass(frozen=True, eq=False)
class FeFunction:
    mesh: Mesh
    dofmap: DofMap
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=np.float64)
        if coefficients.shape != (self.dofmap.n_dofs,):
            raise ValueError(
                f"expected {self.dofmap.n_dofs} coefficients, got shape {coefficients.shape}"
            )
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zero(cls, mesh: Mesh, dofmap: DofMap | None = None) -> "FeFunction":
        dofmap = build_dof_map(mesh) if dofmap is None else dofmap
        return cls(mesh, dofmap, np.zeros(dofmap.n_dofs))

    def with_coefficients(self, coefficients: np.ndarray) -> "FeFunction":
        return FeFunction(self.mesh, self.dofmap, coefficients)

    def nodal_values(self) -> np.ndarray:
        values = np.zeros(self.mesh.n_vertices)
        values[self.dofmap.dof_to_vertex] = self.coefficients
        return values

    @cached_property
    def _finder(self):
        vertices = self.mesh.vertices
        return Triangulation(vertices[:, 0], vertices[:, 1], self.mesh.elements).get_trifinder()

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Point values; points outside the mesh raise ``ValueError``."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        located = np.asarray(self._finder(points[:, 0], points[:, 1]), dtype=np.int64)
        if np.any(located < 0):
            outside = points[located < 0][0]
            raise ValueError(f"point ({outside[0]}, {outside[1]}) lies outside the mesh")
        corners = self.mesh.corners[located]
        gradients = self.mesh.basis_gradients[located]
        # barycentric coordinates from the affine basis
        lam = np.einsum("pkd,pd->pk", gradients, points - corners[:, 0, :])
        lam[:, 0] += 1.0
        nodal = self.nodal_values()[self.mesh.elements[located]]
        return np.sum(lam * nodal, axis=1)


def build_dof_map(mesh: Mesh) -> DofMap:
    interior = ~mesh.boundary_vertex_mask
    dof_to_vertex = np.flatnonzero(interior).astype(np.int64)
    vertex_to_dof = np.full(mesh.n_vertices, -1, dtype=np.int64)
    vertex_to_dof[dof_to_vertex] = np.arange(len(dof_to_vertex), dtype=np.int64)
    vertex_to_dof.setflags(write=False)
    dof_to_vertex.setflags(write=False)
    return DofMap(vertex_to_dof=vertex_to_dof, dof_to_vertex=dof_to_vertex)


def gradient_field(mesh: Mesh, u: FeFunction) -> np.ndarray:
    """Elementwise gradients, shape (n_elements, 2)."""
    if u.mesh is not mesh:
        raise ValueError("function is defined on a different mesh")
    return combine_gradients(u.nodal_values()[mesh.elements], mesh.basis_gradients)


def combine_gradients(nodal: np.ndarray, basis_gradients: np.ndarray) -> np.ndarray:
    """Sum of nodal values times basis gradients, element by element in local order."""
    return (
        nodal[:, 0, None] * basis_gradients[:, 0]
        + nodal[:, 1, None] * basis_gradients[:, 1]
        + nodal[:, 2, None] * basis_gradients[:, 2]
    )


def interpolate(
    mesh: Mesh,
    function: Callable[[np.ndarray], np.ndarray],
    dofmap: DofMap | None = None,
) -> FeFunction:
    """Nodal interpolant; ``function`` receives points of shape (n, 2)."""
    dofmap = build_dof_map(mesh) if dofmap is None else dofmap
    points = mesh.vertices[dofmap.dof_to_vertex]
    return FeFunction(mesh, dofmap, np.asarray(function(points), dtype=np.float64))


def prolongate(
    u: FeFunction, fine_mesh: Mesh, dofmap: DofMap | None = None
) -> FeFunction:
    """Represent ``u`` on a refinement of its mesh.

    Vertices created by bisection take the mean of their parent edge values.
    """
    coarse = u.mesh
    if fine_mesh is coarse:
        return u if dofmap is None else FeFunction(fine_mesh, dofmap, u.coefficients)
    if fine_mesh.lineage != coarse.lineage or fine_mesh.n_vertices < coarse.n_vertices:
        raise ValueError("fine mesh is not a refinement of the function's mesh")
    if not np.array_equal(fine_mesh.vertices[: coarse.n_vertices], coarse.vertices):
        raise ValueError("fine mesh does not extend the coarse vertex list")

    parents = fine_mesh.vertex_parents[coarse.n_vertices :]
    if len(parents) and parents.min() < 0:
        raise ValueError("fine mesh carries no genealogy for its new vertices")

    values = np.zeros(fine_mesh.n_vertices)
    known = np.zeros(fine_mesh.n_vertices, dtype=bool)
    values[: coarse.n_vertices] = u.nodal_values()
    known[: coarse.n_vertices] = True
    pending = np.arange(coarse.n_vertices, fine_mesh.n_vertices)
    # vertices of later refinements hang off vertices of earlier ones
    while len(pending):
        ready = known[parents[pending - coarse.n_vertices]].all(axis=1)
        if not ready.any():
            raise ValueError("vertex genealogy is cyclic")
        batch = pending[ready]
        pair = parents[batch - coarse.n_vertices]
        values[batch] = 0.5 * (values[pair[:, 0]] + values[pair[:, 1]])
        known[batch] = True
        pending = pending[~ready]

    dofmap = build_dof_map(fine_mesh) if dofmap is None else dofmap
    return FeFunction(fine_mesh, dofmap, values[dofmap.dof_to_vertex])
