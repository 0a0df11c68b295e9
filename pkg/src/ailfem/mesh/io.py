"""
Plain-text mesh exchange.

Format::

    vertices N elements M
    x y                      (N lines)
    i j k refedge b0 b1 b2   (M lines)

Indices are 0-based. ``refedge`` is the local edge (0, 1 or 2) that is the
refinement edge; meshes are written with 0 because the refinement edge is
always stored opposite the first vertex. ``b0 b1 b2`` are 1 for boundary
edges. A loaded mesh is a new initial mesh; refinement genealogy is not stored.
"""

from pathlib import Path

import numpy as np

from ailfem.mesh.mesh import Mesh


def dump_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    lines = [f"vertices {mesh.n_vertices} elements {mesh.n_elements}"]
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in mesh.vertices.tolist())
    for (i, j, k), flags in zip(mesh.elements.tolist(), mesh.boundary.tolist()):
        b0, b1, b2 = (int(flag) for flag in flags)
        lines.append(f"{i} {j} {k} 0 {b0} {b1} {b2}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_mesh(path: str | Path) -> Mesh:
    path = Path(path)
    rows = [
        (number, line.split())
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1)
        if line.strip()
    ]
    if not rows:
        raise ValueError(f"{path}: empty mesh file")

    header = rows[0][1]
    if len(header) != 4 or header[0] != "vertices" or header[2] != "elements":
        raise ValueError(f"{path}:1: expected 'vertices N elements M'")
    try:
        n_vertices, n_elements = int(header[1]), int(header[3])
    except ValueError:
        raise ValueError(f"{path}:1: vertex and element counts must be integers") from None
    if len(rows) != 1 + n_vertices + n_elements:
        raise ValueError(
            f"{path}: expected {n_vertices} vertex and {n_elements} element lines, "
            f"found {len(rows) - 1} data lines"
        )

    vertices = np.empty((n_vertices, 2))
    for index, (number, fields) in enumerate(rows[1 : 1 + n_vertices]):
        if len(fields) != 2:
            raise ValueError(f"{path}:{number}: expected 'x y'")
        try:
            vertices[index] = [float(fields[0]), float(fields[1])]
        except ValueError:
            raise ValueError(f"{path}:{number}: invalid coordinate") from None

    elements = np.empty((n_elements, 3), dtype=np.int64)
    boundary = np.empty((n_elements, 3), dtype=bool)
    for index, (number, fields) in enumerate(rows[1 + n_vertices :]):
        if len(fields) != 7:
            raise ValueError(f"{path}:{number}: expected 'i j k refedge b0 b1 b2'")
        try:
            values = [int(field) for field in fields]
        except ValueError:
            raise ValueError(f"{path}:{number}: element fields must be integers") from None
        refedge = values[3]
        if refedge not in (0, 1, 2):
            raise ValueError(f"{path}:{number}: refedge must be 0, 1 or 2")
        order = [(refedge + shift) % 3 for shift in range(3)]
        elements[index] = [values[k] for k in order]
        boundary[index] = [bool(values[4 + k]) for k in order]

    if n_elements and (elements.min() < 0 or elements.max() >= n_vertices):
        raise ValueError(f"{path}: element references a vertex that does not exist")
    return Mesh.from_triangles(vertices, elements, boundary, longest_edge=False)
