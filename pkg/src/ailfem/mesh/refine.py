"""
Newest vertex bisection.

Bisecting ``(a, b, c)`` through the midpoint ``m`` of its refinement edge
``(b, c)`` gives the children ``(m, a, b)`` and ``(m, c, a)``; both keep the
counterclockwise orientation and have ``m`` as their newest vertex.
"""

import logging
from collections.abc import Iterable

import numpy as np

from ailfem.mesh.marks import MarkSet
from ailfem.mesh.mesh import Mesh

logger = logging.getLogger(__name__)


def refine(mesh: Mesh, marked: MarkSet | Iterable[int] | np.ndarray) -> Mesh:
    """Coarsest conforming NVB refinement in which every marked element is bisected.

    Unrefined elements keep their index. The first child of a refined element
    takes the parent's index, the remaining children are appended in parent
    order. New vertices are appended in the order of their edge keys.
    """
    marks = MarkSet.coerce(marked, mesh.n_elements)
    if len(marks) == 0:
        return mesh

    topology = mesh.topology
    element_edges = topology.element_edges
    edge_marked = np.zeros(topology.n_edges, dtype=bool)
    edge_marked[element_edges[marks.indices, 0]] = True

    # closure: a marked edge forces the refinement edge of its element
    sweeps = 0
    while True:
        pending = (
            edge_marked[element_edges[:, 1]] | edge_marked[element_edges[:, 2]]
        ) & ~edge_marked[element_edges[:, 0]]
        if not pending.any():
            break
        edge_marked[element_edges[pending, 0]] = True
        sweeps += 1

    bisected = np.flatnonzero(edge_marked)
    midpoint = np.full(topology.n_edges, -1, dtype=np.int64)
    midpoint[bisected] = mesh.n_vertices + np.arange(len(bisected), dtype=np.int64)
    endpoints = topology.edges[bisected]
    new_vertices = 0.5 * (
        mesh.vertices[endpoints[:, 0]] + mesh.vertices[endpoints[:, 1]]
    )

    refined = np.flatnonzero(edge_marked[element_edges[:, 0]])
    split_left = edge_marked[element_edges[refined, 2]]
    split_right = edge_marked[element_edges[refined, 1]]
    logger.debug(
        "refine: %d marked, %d refined after %d closure sweeps, %d new vertices",
        len(marks),
        len(refined),
        sweeps,
        len(bisected),
    )

    left, left_flags, right, right_flags = _bisect(
        mesh.elements[refined],
        mesh.boundary[refined],
        midpoint[element_edges[refined, 0]],
    )
    left_a, left_a_flags, left_b, left_b_flags = _bisect(
        left, left_flags, midpoint[element_edges[refined, 2]]
    )
    right_a, right_a_flags, right_b, right_b_flags = _bisect(
        right, right_flags, midpoint[element_edges[refined, 1]]
    )

    node = mesh.node_ids[refined]
    generation = mesh.generation[refined]
    sl = split_left[:, None]
    sr = split_right[:, None]

    # four child slots per refined element, slots 1 and 3 only exist after a second split
    slot_elements = np.stack(
        [
            np.where(sl, left_a, left),
            left_b,
            np.where(sr, right_a, right),
            right_b,
        ],
        axis=1,
    )
    slot_flags = np.stack(
        [
            np.where(sl, left_a_flags, left_flags),
            left_b_flags,
            np.where(sr, right_a_flags, right_flags),
            right_b_flags,
        ],
        axis=1,
    )
    slot_nodes = np.stack(
        [
            np.where(split_left, 4 * node, 2 * node),
            4 * node + 1,
            np.where(split_right, 4 * node + 2, 2 * node + 1),
            4 * node + 3,
        ],
        axis=1,
    )
    slot_generation = np.stack(
        [
            generation + 1 + split_left,
            generation + 2,
            generation + 1 + split_right,
            generation + 2,
        ],
        axis=1,
    )
    present = np.stack(
        [
            np.ones(len(refined), dtype=bool),
            split_left,
            np.ones(len(refined), dtype=bool),
            split_right,
        ],
        axis=1,
    )
    extra = present[:, 1:]
    owner = np.repeat(refined[:, None], 3, axis=1)[extra]

    elements = mesh.elements.copy()
    elements[refined] = slot_elements[:, 0]
    boundary = mesh.boundary.copy()
    boundary[refined] = slot_flags[:, 0]
    node_ids = mesh.node_ids.copy()
    node_ids[refined] = slot_nodes[:, 0]
    generations = mesh.generation.copy()
    generations[refined] = slot_generation[:, 0]

    return Mesh(
        vertices=np.vstack([mesh.vertices, new_vertices]),
        elements=np.vstack([elements, slot_elements[:, 1:][extra]]),
        boundary=np.vstack([boundary, slot_flags[:, 1:][extra]]),
        generation=np.concatenate([generations, slot_generation[:, 1:][extra]]),
        roots=np.concatenate([mesh.roots, mesh.roots[owner]]),
        node_ids=np.concatenate([node_ids, slot_nodes[:, 1:][extra]]),
        parents=np.concatenate([np.arange(mesh.n_elements, dtype=np.int64), owner]),
        vertex_parents=np.vstack([mesh.vertex_parents, endpoints]),
        lineage=mesh.lineage,
        initial=mesh.root_mesh,
    )


def uniform_refine(mesh: Mesh) -> Mesh:
    return refine(mesh, np.arange(mesh.n_elements, dtype=np.int64))


def overlay(a: Mesh, b: Mesh) -> Mesh:
    """Coarsest common refinement of two NVB refinements of one initial mesh."""
    if a.lineage != b.lineage:
        raise ValueError("meshes do not descend from the same initial mesh")

    inner_a = _proper_ancestors(a)
    inner_b = _proper_ancestors(b)
    target = frozenset(x for x in a.leaf_ids if x not in inner_b) | frozenset(
        y for y in b.leaf_ids if y not in inner_a
    )
    if target == a.leaf_ids:
        return a
    if target == b.leaf_ids:
        return b

    internal = inner_a | inner_b
    current = a.root_mesh
    while True:
        keys = zip(current.roots.tolist(), current.node_ids.tolist())
        marked = [index for index, key in enumerate(keys) if key in internal]
        if not marked:
            break
        current = refine(current, marked)

    if current.leaf_ids != target:
        raise ValueError("meshes are not newest-vertex refinements of their initial mesh")
    return current


def _bisect(
    elements: np.ndarray, flags: np.ndarray, midpoints: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a, b, c = elements[:, 0], elements[:, 1], elements[:, 2]
    f0, f1, f2 = flags[:, 0], flags[:, 1], flags[:, 2]
    interior = np.zeros_like(f0)
    first = np.stack([midpoints, a, b], axis=1)
    first_flags = np.stack([f2, f0, interior], axis=1)
    second = np.stack([midpoints, c, a], axis=1)
    second_flags = np.stack([f1, interior, f0], axis=1)
    return first, first_flags, second, second_flags


def _proper_ancestors(mesh: Mesh) -> set[tuple[int, int]]:
    ancestors: set[tuple[int, int]] = set()
    for root, node in zip(mesh.roots.tolist(), mesh.node_ids.tolist()):
        node >>= 1
        while node >= 1 and (root, node) not in ancestors:
            ancestors.add((root, node))
            node >>= 1
    return ancestors
