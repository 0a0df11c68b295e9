"""
Initial meshes.
"""

import numpy as np

from ailfem.mesh.mesh import Mesh

# removed quadrant of the L-shape (-1, 1)^2 minus [0, 1] x [-1, 0]
_LSHAPE_CUT = ((0.0, 1.0), (-1.0, 0.0))


def make_lshape_initial(cells_per_unit: int = 4) -> Mesh:
    """Criss-cross triangulation of the L-shape, 192 elements for the default grid.

    Every square cell of side ``1 / cells_per_unit`` is split into four
    triangles through its center. Each triangle lists the center first, so the
    square side is its refinement edge and neighbouring triangles share it.
    """
    if cells_per_unit < 1:
        raise ValueError(f"cells_per_unit must be >= 1, got {cells_per_unit}")

    n = 2 * cells_per_unit
    h = 1.0 / cells_per_unit
    (cut_x0, cut_x1), (cut_y0, cut_y1) = _LSHAPE_CUT

    def removed(x: float, y: float) -> bool:
        return cut_x0 < x <= cut_x1 and cut_y0 <= y < cut_y1

    grid: dict[tuple[int, int], int] = {}
    points: list[tuple[float, float]] = []
    for j in range(n + 1):
        for i in range(n + 1):
            x, y = -1.0 + i * h, -1.0 + j * h
            if removed(x, y):
                continue
            grid[i, j] = len(points)
            points.append((x, y))

    cells = [
        (i, j)
        for j in range(n)
        for i in range(n)
        if not removed(-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h)
    ]
    triangles: list[tuple[int, int, int]] = []
    for i, j in cells:
        center = len(points)
        points.append((-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h))
        ring = [grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]]
        for k in range(4):
            triangles.append((center, ring[k], ring[(k + 1) % 4]))

    return Mesh.from_triangles(np.array(points), np.array(triangles))


def make_unit_square(two_triangles: bool = True) -> Mesh:
    """Unit square, either split along the diagonal (0,0)-(1,1) or criss-crossed."""
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    if two_triangles:
        return Mesh.from_triangles(
            corners, np.array([[1, 2, 0], [3, 0, 2]]), longest_edge=False
        )
    vertices = np.vstack([corners, [[0.5, 0.5]]])
    elements = np.array([[4, k, (k + 1) % 4] for k in range(4)])
    return Mesh.from_triangles(vertices, elements, longest_edge=False)


def make_triangle() -> Mesh:
    """The reference triangle (0,0), (1,0), (0,1) with the hypotenuse as refinement edge."""
    return Mesh.from_triangles(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        np.array([[0, 1, 2]]),
        longest_edge=False,
    )
