"""
Quadrature on triangles.

Rules are stored in barycentric coordinates with weights summing to one, so
``integral_T f ~ |T| * sum_q w_q f(x_q)``.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ailfem.mesh.mesh import Mesh

_SQRT15 = math.sqrt(15.0)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    name: str
    barycentric: np.ndarray  # (n_points, 3)
    weights: np.ndarray  # (n_points,), sum 1
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def points(self, corners: np.ndarray) -> np.ndarray:
        """Physical points for elements with corners of shape (ne, 3, 2): (ne, n_points, 2)."""
        return np.einsum("qk,ekd->eqd", self.barycentric, corners)

    def integrate(self, values: np.ndarray, areas: np.ndarray) -> np.ndarray:
        """Elementwise integrals from values of shape (ne, n_points)."""
        return areas * (values @ self.weights)

    def subdivided(self, levels: int) -> "QuadratureRule":
        """Composite rule on ``4**levels`` congruent subtriangles."""
        if levels < 0:
            raise ValueError(f"levels must be >= 0, got {levels}")
        cells = np.eye(3)[None]
        for _ in range(levels):
            cells = _split(cells)
        barycentric = np.einsum("qk,ckd->cqd", self.barycentric, cells).reshape(-1, 3)
        weights = np.tile(self.weights, len(cells)) / len(cells)
        return QuadratureRule(
            name=f"{self.name}x{len(cells)}",
            barycentric=barycentric,
            weights=weights,
            degree=self.degree,
        )


CENTROID = QuadratureRule(
    name="centroid",
    barycentric=np.full((1, 3), 1.0 / 3.0),
    weights=np.ones(1),
    degree=1,
)


def _orbit(a: float) -> list[list[float]]:
    b = 0.5 * (1.0 - a)
    return [[a, b, b], [b, a, b], [b, b, a]]


DEGREE5 = QuadratureRule(
    name="degree5",
    barycentric=np.array(
        [[1.0 / 3.0] * 3]
        + _orbit((9.0 - 2.0 * _SQRT15) / 21.0)
        + _orbit((9.0 + 2.0 * _SQRT15) / 21.0)
    ),
    weights=np.array(
        [9.0 / 40.0]
        + [(155.0 + _SQRT15) / 1200.0] * 3
        + [(155.0 - _SQRT15) / 1200.0] * 3
    ),
    degree=5,
)


@dataclass(frozen=True, eq=False)
class ScatteredQuadrature:
    """Quadrature points with absolute weights and the element each belongs to."""

    points: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,)
    elements: np.ndarray  # (n,)

    def integrate(self, values: np.ndarray, n_elements: int) -> np.ndarray:
        return np.bincount(self.elements, weights=self.weights * values, minlength=n_elements)

    @cached_property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def graded_quadrature(
    mesh: Mesh,
    singular_point: tuple[float, float],
    *,
    depth: int = 24,
    rule: QuadratureRule = DEGREE5,
    spread: float = 3.0,
) -> ScatteredQuadrature:
    """Apply ``rule`` on cells graded towards ``singular_point``.

    A cell whose centroid lies within ``spread`` cell radii of the point is
    split into four until ``depth`` splits have been made.
    """
    target = np.asarray(singular_point, dtype=np.float64)
    cells = mesh.corners
    owners = np.arange(mesh.n_elements, dtype=np.int64)
    points: list[np.ndarray] = []
    weights: list[np.ndarray] = []
    elements: list[np.ndarray] = []

    def emit(batch: np.ndarray, batch_owners: np.ndarray) -> None:
        if not len(batch):
            return
        areas = np.abs(_cell_areas(batch))
        points.append(rule.points(batch).reshape(-1, 2))
        weights.append((areas[:, None] * rule.weights[None, :]).ravel())
        elements.append(np.repeat(batch_owners, rule.n_points))

    for _ in range(depth):
        centroid = cells.mean(axis=1)
        radius = np.max(np.linalg.norm(cells - centroid[:, None, :], axis=2), axis=1)
        near = np.linalg.norm(centroid - target, axis=1) < spread * radius
        emit(cells[~near], owners[~near])
        if not near.any():
            cells = cells[:0]
            break
        cells = _split(cells[near])
        owners = np.repeat(owners[near], 4)
    emit(cells, owners)

    return ScatteredQuadrature(
        points=np.concatenate(points) if points else np.empty((0, 2)),
        weights=np.concatenate(weights) if weights else np.empty(0),
        elements=np.concatenate(elements) if elements else np.empty(0, dtype=np.int64),
    )


def _split(cells: np.ndarray) -> np.ndarray:
    a, b, c = cells[:, 0], cells[:, 1], cells[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    children = np.stack(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([bc, ca, ab], axis=1),
        ],
        axis=1,
    )
    return children.reshape(-1, 3, cells.shape[-1])


def _cell_areas(cells: np.ndarray) -> np.ndarray:
    d1 = cells[:, 1] - cells[:, 0]
    d2 = cells[:, 2] - cells[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
