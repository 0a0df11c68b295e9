"""
Conforming triangulations in the newest-vertex convention.

Element ``(a, b, c)`` carries its refinement edge ``(b, c)`` opposite the first
local vertex. Local edge ``k`` is the edge opposite local vertex ``k``; boundary
flags and edge ids follow that numbering.

Every element also knows where it sits in the bisection forest of the initial
mesh: ``roots`` is the index of its initial ancestor and ``node_ids`` is the
binary path from that root (root = 1, children of ``p`` are ``2p`` and
``2p + 1``).
"""

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# node_ids are int64 paths, one bit per bisection
MAX_GENERATION = 62

# local vertices spanning local edge k
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]], dtype=np.int64)

_LONGEST_EDGE_RTOL = 1e-12


@dataclass(frozen=True)
class EdgeTopology:
    edges: np.ndarray  # (n_edges, 2), sorted vertex pairs in lexicographic order
    element_edges: np.ndarray  # (n_elements, 3), edge id of each local edge
    edge_elements: np.ndarray  # (n_edges, 2), adjacent elements, -1 when absent
    edge_counts: np.ndarray  # (n_edges,)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def interior(self) -> np.ndarray:
        return self.edge_counts == 2


@dataclass(frozen=True)
class MeshDiagnostic:
    kind: str  # "orientation", "conformity", "hanging_node" or "boundary_flag"
    element: int | None
    message: str


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (n_vertices, 2)
    elements: np.ndarray  # (n_elements, 3)
    boundary: np.ndarray  # (n_elements, 3) bool
    generation: np.ndarray
    roots: np.ndarray
    node_ids: np.ndarray
    parents: np.ndarray  # element index in the mesh this one was refined from, -1 if none
    vertex_parents: np.ndarray  # (n_vertices, 2) endpoints of the bisected edge, -1 if none
    lineage: str
    initial: "Mesh | None" = None

    def __post_init__(self) -> None:
        _freeze(self, "vertices", np.float64)
        _freeze(self, "elements", np.int64)
        _freeze(self, "boundary", np.bool_)
        _freeze(self, "generation", np.int64)
        _freeze(self, "roots", np.int64)
        _freeze(self, "node_ids", np.int64)
        _freeze(self, "parents", np.int64)
        _freeze(self, "vertex_parents", np.int64)

        n_elements = len(self.elements)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        if self.elements.ndim != 2 or self.elements.shape[1] != 3:
            raise ValueError("elements must have shape (m, 3)")
        if self.boundary.shape != self.elements.shape:
            raise ValueError("boundary flags must have one entry per local edge")
        for name in ("generation", "roots", "node_ids", "parents"):
            if getattr(self, name).shape != (n_elements,):
                raise ValueError(f"{name} must have one entry per element")
        if self.vertex_parents.shape != (len(self.vertices), 2):
            raise ValueError("vertex_parents must have shape (n_vertices, 2)")
        if n_elements and (
            self.elements.min() < 0 or self.elements.max() >= len(self.vertices)
        ):
            raise ValueError("element references a vertex that does not exist")
        if n_elements and self.generation.max() > MAX_GENERATION:
            raise ValueError(
                f"bisection depth {int(self.generation.max())} exceeds {MAX_GENERATION}"
            )

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_triangles(
        cls,
        vertices: np.ndarray,
        elements: np.ndarray,
        boundary: np.ndarray | None = None,
        *,
        longest_edge: bool = True,
    ) -> "Mesh":
        """Build an initial mesh.

        Elements are reoriented counterclockwise. With ``longest_edge`` the
        refinement edge of every element is its longest edge, ties going to the
        edge whose opposite vertex has the smallest index. Without ``boundary``
        flags, edges with a single adjacent element are flagged.
        """
        points = np.array(vertices, dtype=np.float64).reshape(-1, 2)
        triangles = np.array(elements, dtype=np.int64).reshape(-1, 3)
        flags = None if boundary is None else np.array(boundary, dtype=bool)

        flipped = _signed_areas(points, triangles) < 0
        if flipped.any():
            triangles[flipped] = triangles[flipped][:, [0, 2, 1]]
            if flags is not None:
                flags[flipped] = flags[flipped][:, [0, 2, 1]]

        if longest_edge and len(triangles):
            shift = _longest_edge_shift(points, triangles)
            order = (shift[:, None] + np.arange(3)[None, :]) % 3
            triangles = np.take_along_axis(triangles, order, axis=1)
            if flags is not None:
                flags = np.take_along_axis(flags, order, axis=1)

        if flags is None:
            topology = build_topology(triangles)
            flags = topology.edge_counts[topology.element_edges] == 1

        n_elements = len(triangles)
        return cls(
            vertices=points,
            elements=triangles,
            boundary=flags,
            generation=np.zeros(n_elements, dtype=np.int64),
            roots=np.arange(n_elements, dtype=np.int64),
            node_ids=np.ones(n_elements, dtype=np.int64),
            parents=np.full(n_elements, -1, dtype=np.int64),
            vertex_parents=np.full((len(points), 2), -1, dtype=np.int64),
            lineage=_lineage_digest(points, triangles),
        )

    # ------------------------------------------------------------------
    # Sizes and identity
    # ------------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def root_mesh(self) -> "Mesh":
        return self if self.initial is None else self.initial

    @cached_property
    def leaf_ids(self) -> frozenset[tuple[int, int]]:
        return frozenset(zip(self.roots.tolist(), self.node_ids.tolist()))

    def same_partition(self, other: "Mesh") -> bool:
        """True when both meshes consist of the same bisection-tree elements."""
        return self.lineage == other.lineage and self.leaf_ids == other.leaf_ids

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    @cached_property
    def corners(self) -> np.ndarray:
        return self.vertices[self.elements]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.elements)

    @property
    def areas(self) -> np.ndarray:
        return self.signed_areas

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        """Gradients of the barycentric coordinates, shape (n_elements, 3, 2)."""
        p = self.corners
        opposite = p[:, LOCAL_EDGES[:, 1]] - p[:, LOCAL_EDGES[:, 0]]
        grads = np.stack([-opposite[..., 1], opposite[..., 0]], axis=-1)
        return grads / (2.0 * self.signed_areas)[:, None, None]

    def angles(self) -> np.ndarray:
        """Interior angles in radians, angle k at local vertex k."""
        p = self.corners
        result = np.empty((self.n_elements, 3))
        for k in range(3):
            u = p[:, (k + 1) % 3] - p[:, k]
            v = p[:, (k + 2) % 3] - p[:, k]
            cos = np.einsum("ij,ij->i", u, v) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
            )
            result[:, k] = np.arccos(np.clip(cos, -1.0, 1.0))
        return result

    def min_angle(self) -> float:
        return float(self.angles().min()) if self.n_elements else 0.0

    def angle_classes(self, decimals: int = 8) -> set[tuple[float, ...]]:
        """Distinct sorted angle triples, i.e. similarity classes up to reflection."""
        rounded = np.round(np.sort(self.angles(), axis=1), decimals)
        return {tuple(row) for row in rounded.tolist()}

    # ------------------------------------------------------------------
    # Topology
    # ------------------------------------------------------------------

    @cached_property
    def topology(self) -> EdgeTopology:
        return build_topology(self.elements)

    @cached_property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        rows, cols = np.nonzero(self.boundary)
        local = LOCAL_EDGES[cols]
        mask[self.elements[rows, local[:, 0]]] = True
        mask[self.elements[rows, local[:, 1]]] = True
        return mask

    def refinement_edges(self) -> np.ndarray:
        return self.elements[:, 1:]


def build_topology(elements: np.ndarray) -> EdgeTopology:
    """Identify edges by their sorted vertex pair."""
    n_elements = len(elements)
    local = elements[:, LOCAL_EDGES]  # (ne, 3, 2)
    keys = np.sort(local.reshape(-1, 2), axis=1)
    if n_elements == 0:
        empty = np.empty((0, 2), dtype=np.int64)
        return EdgeTopology(
            edges=empty,
            element_edges=np.empty((0, 3), dtype=np.int64),
            edge_elements=empty.copy(),
            edge_counts=np.empty(0, dtype=np.int64),
        )
    edges, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    counts = np.bincount(inverse, minlength=len(edges))

    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    edge_elements = np.full((len(edges), 2), -1, dtype=np.int64)
    edge_elements[:, 0] = order[starts] // 3
    shared = counts >= 2
    edge_elements[shared, 1] = order[starts[shared] + 1] // 3

    return EdgeTopology(
        edges=edges.astype(np.int64),
        element_edges=inverse.reshape(n_elements, 3).astype(np.int64),
        edge_elements=edge_elements,
        edge_counts=counts.astype(np.int64),
    )


def validate(mesh: Mesh) -> list[MeshDiagnostic]:
    """Report orientation, conformity and boundary-flag problems."""
    diagnostics: list[MeshDiagnostic] = []

    for element in np.flatnonzero(mesh.signed_areas <= 0.0).tolist():
        diagnostics.append(
            MeshDiagnostic(
                "orientation",
                element,
                f"element {element} has non-positive signed area "
                f"{mesh.signed_areas[element]:.3e}",
            )
        )

    topology = mesh.topology
    flagged = np.bincount(
        topology.element_edges.ravel(),
        weights=mesh.boundary.ravel().astype(np.float64),
        minlength=topology.n_edges,
    )

    for edge in np.flatnonzero(topology.edge_counts > 2).tolist():
        a, b = topology.edges[edge].tolist()
        diagnostics.append(
            MeshDiagnostic(
                "conformity",
                int(topology.edge_elements[edge, 0]),
                f"edge ({a}, {b}) is shared by {int(topology.edge_counts[edge])} elements",
            )
        )

    for edge in np.flatnonzero((topology.edge_counts == 2) & (flagged > 0)).tolist():
        a, b = topology.edges[edge].tolist()
        diagnostics.append(
            MeshDiagnostic(
                "boundary_flag",
                int(topology.edge_elements[edge, 0]),
                f"interior edge ({a}, {b}) is flagged as boundary",
            )
        )

    open_edges = np.flatnonzero((topology.edge_counts == 1) & (flagged == 0))
    for edge in open_edges.tolist():
        a, b = topology.edges[edge].tolist()
        element = int(topology.edge_elements[edge, 0])
        diagnostics.append(
            MeshDiagnostic(
                "conformity",
                element,
                f"edge ({a}, {b}) has a single neighbour but is not flagged as boundary",
            )
        )
        for vertex in _vertices_inside_segment(mesh.vertices, a, b):
            diagnostics.append(
                MeshDiagnostic(
                    "hanging_node",
                    element,
                    f"vertex {vertex} lies inside edge ({a}, {b}) of element {element}",
                )
            )

    return diagnostics


# ----------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------


def _freeze(mesh: Mesh, name: str, dtype: type) -> None:
    array = np.array(getattr(mesh, name), dtype=dtype)
    array.setflags(write=False)
    object.__setattr__(mesh, name, array)


def _signed_areas(vertices: np.ndarray, elements: np.ndarray) -> np.ndarray:
    p0 = vertices[elements[:, 0]]
    p1 = vertices[elements[:, 1]]
    p2 = vertices[elements[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


def _longest_edge_shift(vertices: np.ndarray, elements: np.ndarray) -> np.ndarray:
    p = vertices[elements]
    lengths = np.stack(
        [
            np.sum((p[:, LOCAL_EDGES[k, 0]] - p[:, LOCAL_EDGES[k, 1]]) ** 2, axis=1)
            for k in range(3)
        ],
        axis=1,
    )
    longest = lengths.max(axis=1, keepdims=True)
    candidates = lengths >= longest * (1.0 - _LONGEST_EDGE_RTOL)
    sentinel = np.iinfo(np.int64).max
    return np.argmin(np.where(candidates, elements, sentinel), axis=1)


def _lineage_digest(vertices: np.ndarray, elements: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(vertices).tobytes())
    digest.update(np.ascontiguousarray(elements).tobytes())
    return digest.hexdigest()[:16]


def _vertices_inside_segment(vertices: np.ndarray, a: int, b: int) -> list[int]:
    start, end = vertices[a], vertices[b]
    direction = end - start
    length_sq = float(direction @ direction)
    if length_sq == 0.0:
        return []
    rel = vertices - start
    t = rel @ direction / length_sq
    cross = rel[:, 0] * direction[1] - rel[:, 1] * direction[0]
    inside = (np.abs(cross) <= 1e-12 * length_sq) & (t > 1e-12) & (t < 1 - 1e-12)
    return np.flatnonzero(inside).tolist()
