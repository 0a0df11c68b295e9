"""
Residual error indicators.

``eta_T^2 = |T| * ||g||_T^2 + |T|^{1/2} * sum_e |e| [[sigma . n]]_e^2`` with the
flux ``sigma = mu(|grad u|^2) grad u`` and the sum running over the interior
edges of ``T``. Every interior edge contributes to both adjacent elements.
"""

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.fem.space import FeFunction
from ailfem.mesh.marks import MarkSet
from ailfem.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class IndicatorField:
    mesh: Mesh
    values: np.ndarray  # squared indicators per element

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.mesh.n_elements,):
            raise ValueError(
                f"expected {self.mesh.n_elements} indicators, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("indicators must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def edge_jumps(disc: Discretization, coefficients: np.ndarray) -> np.ndarray:
    """``|e| [[sigma . n]]^2`` per edge, zero on boundary edges."""
    mesh = disc.mesh
    topology = mesh.topology
    flux = disc.model.flux(disc.gradients(coefficients))
    jumps = np.zeros(topology.n_edges)
    interior = np.flatnonzero(topology.interior)
    if not len(interior):
        return jumps
    ends = mesh.vertices[topology.edges[interior]]
    tangent = ends[:, 1] - ends[:, 0]
    length_sq = np.sum(tangent * tangent, axis=1)
    left, right = topology.edge_elements[interior].T
    difference = flux[left] - flux[right]
    # unnormalised normal (t_y, -t_x)
    normal_jump = difference[:, 0] * tangent[:, 1] - difference[:, 1] * tangent[:, 0]
    jumps[interior] = normal_jump * normal_jump / np.sqrt(length_sq)
    return jumps


def local_indicators(disc: Discretization, u: FeFunction) -> IndicatorField:
    if u.mesh is not disc.mesh:
        raise ValueError("function is defined on a different mesh")
    mesh = disc.mesh
    areas = mesh.areas
    per_edge = edge_jumps(disc, u.coefficients)[mesh.topology.element_edges]
    edge_term = per_edge[:, 0] + per_edge[:, 1] + per_edge[:, 2]
    volume = areas * disc.load_l2_squared
    return IndicatorField(mesh, volume + np.sqrt(areas) * edge_term)


def total(field: IndicatorField) -> float:
    return float(np.sqrt(np.sum(field.values)))


def subset_total(field: IndicatorField, subset: MarkSet | Iterable[int] | np.ndarray) -> float:
    marks = MarkSet.coerce(subset, len(field))
    return float(np.sqrt(np.sum(field.values[marks.indices])))
