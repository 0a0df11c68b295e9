"""Smoke-check for initial meshes, newest vertex bisection, overlay and mesh files."""

import dataclasses
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_equal(actual, expected, label: str) -> None:
    if actual != expected:
        raise AssertionError(f"{label}: expected {expected}, got {actual}")


def _assert_close(actual: float, expected: float, label: str, tol: float = 1e-12) -> None:
    if not math.isclose(actual, expected, rel_tol=tol, abs_tol=tol):
        raise AssertionError(f"{label}: expected {expected!r}, got {actual!r}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


def _assert_valid(mesh, label: str) -> None:
    from ailfem.mesh import validate

    report = validate(mesh)
    if report:
        raise AssertionError(f"{label}: {report[0].message} ({len(report)} diagnostics)")


def _check_initial_meshes() -> None:
    from ailfem.fem import build_dof_map
    from ailfem.mesh import make_lshape_initial, make_unit_square

    lshape = make_lshape_initial()
    _assert_equal(lshape.n_elements, 192, "L-shape element count")
    _assert_close(float(lshape.areas.sum()), 3.0, "L-shape area")
    _assert_valid(lshape, "L-shape")
    boundary = int(lshape.boundary_vertex_mask.sum())
    _assert_equal(build_dof_map(lshape).n_dofs, lshape.n_vertices - boundary, "L-shape dofs")
    _assert_equal(build_dof_map(lshape).n_dofs, 81, "L-shape interior vertices")

    square = make_unit_square()
    _assert_equal(square.n_elements, 2, "square element count")
    _assert_equal(square.n_vertices, 4, "square vertex count")
    _assert_close(float(square.areas.sum()), 1.0, "square area")
    diagonal = {tuple(sorted(edge)) for edge in square.refinement_edges().tolist()}
    _assert_equal(diagonal, {(0, 2)}, "square refinement edges")
    _assert_valid(square, "square")


def _check_refine() -> None:
    from ailfem.mesh import MarkSet, make_lshape_initial, make_unit_square, refine, uniform_refine

    square = make_unit_square()
    both = refine(square, [0, 1])
    _assert_equal(both.n_elements, 4, "square, both marked")
    _assert_valid(both, "square, both marked")
    one = refine(square, MarkSet.from_indices([0], 2))
    _assert_equal(one.n_elements, 4, "square, one marked")
    _assert_valid(one, "square, one marked")
    if refine(square, []) is not square:
        raise AssertionError("refining with an empty mark set must return the same mesh")
    _assert_raises(ValueError, lambda: refine(square, [2]), "out of range mark")
    _assert_raises(ValueError, lambda: refine(square, [0, 0]), "duplicate mark")
    _assert_raises(ValueError, lambda: MarkSet.from_indices([-1], 2), "negative mark")

    lshape = make_lshape_initial()
    once = uniform_refine(lshape)
    if not 2 * 192 <= once.n_elements <= 4 * 192:
        raise AssertionError(f"uniform refinement produced {once.n_elements} elements")
    twice = uniform_refine(once)
    if int(twice.generation.min()) < 2:
        raise AssertionError("two uniform refinements must bisect every element twice")
    _assert_valid(twice, "twice uniformly refined L-shape")

    # graded refinement towards the re-entrant corner
    mesh = lshape
    for _ in range(12):
        centroids = mesh.corners.mean(axis=1)
        nearest = np.argsort(np.hypot(centroids[:, 0], centroids[:, 1]), kind="stable")[:8]
        mesh = refine(mesh, nearest)
        _assert_valid(mesh, f"graded mesh with {mesh.n_elements} elements")
        if np.any(mesh.areas <= 0.0):
            raise AssertionError("refinement produced a non-positive area")

    # newest vertex sits first in every bisected element
    bisected = mesh.generation > 0
    if np.any(mesh.elements[bisected, 0] < lshape.n_vertices):
        raise AssertionError("a bisected element does not list its newest vertex first")
    if mesh.min_angle() < lshape.min_angle() / 2.0 - 1e-12:
        raise AssertionError("minimum angle degenerated under refinement")
    if len(mesh.angle_classes()) > 4 * len(lshape.angle_classes()):
        raise AssertionError(f"too many similarity classes: {len(mesh.angle_classes())}")
    _assert_close(float(mesh.areas.sum()), 3.0, "area after refinement")

    # a marked refine of the criss-cross L-shape bisects each refined element once
    rng = np.random.default_rng(5)
    half = refine(lshape, rng.choice(192, size=96, replace=False))
    refined = int(np.count_nonzero(half.generation[:192] > 0))
    _assert_equal(half.n_elements, 192 + refined, "marked L-shape refinement count")
    if not 192 + 96 <= half.n_elements <= 2 * 192:
        raise AssertionError(f"marked refinement produced {half.n_elements} elements")

    # strict growth once the closure has to bisect twice
    five = refine(uniform_refine(square), [0])
    _assert_equal(five.n_elements, 5, "square after one extra bisection")
    strict = 0
    for index in range(five.n_elements):
        closed = refine(five, [index])
        untouched = len(five.leaf_ids & closed.leaf_ids)
        parents = five.n_elements - untouched
        if not 2 * parents + untouched <= closed.n_elements <= 4 * parents + untouched:
            raise AssertionError(f"marking {index} gave {closed.n_elements} elements")
        strict += closed.n_elements > 2 * parents + untouched
    if not strict:
        raise AssertionError("no single mark forced a second bisection in the closure")


def _check_genealogy() -> None:
    from ailfem.mesh import make_lshape_initial, refine

    rng = np.random.default_rng(11)
    mesh = make_lshape_initial()
    for call in range(20):
        marks = rng.choice(mesh.n_elements, size=max(1, mesh.n_elements // 10), replace=False)
        fine = refine(mesh, marks)
        coarse_areas = mesh.areas[fine.parents]
        bisections = fine.generation - mesh.generation[fine.parents]
        if np.any((bisections < 0) | (bisections > 2)):
            raise AssertionError(f"call {call}: a child is more than two bisections deep")
        if not np.allclose(fine.areas, coarse_areas * 0.5**bisections, rtol=1e-13, atol=0.0):
            raise AssertionError(f"call {call}: a child does not halve its parent per bisection")
        once = np.flatnonzero(bisections == 1)
        if not np.allclose(fine.areas[once], 0.5 * coarse_areas[once], rtol=1e-13, atol=0.0):
            raise AssertionError(f"call {call}: a child area is not half its parent")
        mesh = fine


def _check_single_triangle_classes() -> None:
    from ailfem.mesh import Mesh, make_triangle, refine, uniform_refine

    reference = make_triangle()
    mesh = reference
    for _ in range(8):
        mesh = uniform_refine(mesh)
    _assert_equal(len(mesh.angle_classes()), 1, "isosceles right triangle classes")

    scalene = Mesh.from_triangles(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]), np.array([[0, 1, 2]])
    )
    rng = np.random.default_rng(23)
    mesh = scalene
    for level in range(6):
        mesh = uniform_refine(mesh)
        if len(mesh.angle_classes()) > 4:
            raise AssertionError(f"uniform level {level}: {len(mesh.angle_classes())} classes")
    for call in range(20):
        count = int(rng.integers(1, max(2, mesh.n_elements // 8)))
        mesh = refine(mesh, rng.choice(mesh.n_elements, size=count, replace=False))
        if len(mesh.angle_classes()) > 4:
            raise AssertionError(f"random call {call}: {len(mesh.angle_classes())} classes")


def _check_refinement_axioms() -> None:
    from ailfem.mesh import make_lshape_initial, refine

    initial = make_lshape_initial()
    rng = np.random.default_rng(101)
    mesh, marked_total, worst, halfway = initial, 0, 0.0, 0.0
    for call in range(500):
        count = int(rng.integers(1, 4))
        marks = rng.choice(mesh.n_elements, size=count, replace=False)
        refined_mesh = refine(mesh, marks)
        untouched = len(mesh.leaf_ids & refined_mesh.leaf_ids)
        parents = mesh.n_elements - untouched
        if not parents + mesh.n_elements <= refined_mesh.n_elements <= 4 * parents + untouched:
            raise AssertionError(
                f"call {call}: {refined_mesh.n_elements} elements from {parents} refined "
                f"and {untouched} untouched"
            )
        marked_total += count
        mesh = refined_mesh
        constant = (mesh.n_elements - initial.n_elements) / marked_total
        worst = max(worst, constant)
        if call == 249:
            halfway = constant
    if worst > 50.0:
        raise AssertionError(f"closure overhead {worst:.2f} exceeds 50")
    # doubling the sequence length keeps the constant in place
    if not 0.5 * halfway <= constant <= 2.0 * halfway:
        raise AssertionError(
            f"closure overhead moved from {halfway:.2f} after 250 calls "
            f"to {constant:.2f} after 500"
        )
    _assert_valid(mesh, "randomly refined L-shape")


def _check_overlay() -> None:
    from ailfem.mesh import make_lshape_initial, make_unit_square, overlay, refine, uniform_refine

    lshape = make_lshape_initial()
    if overlay(lshape, lshape) is not lshape:
        raise AssertionError("overlay(m, m) must be m")
    fine = uniform_refine(lshape)
    if not overlay(lshape, fine).same_partition(fine):
        raise AssertionError("overlay with a refinement must be the refinement")
    _assert_raises(
        ValueError, lambda: overlay(lshape, make_unit_square()), "overlay of unrelated meshes"
    )

    rng = np.random.default_rng(7)
    square = make_unit_square()
    for trial in range(100):
        meshes = []
        for _ in range(2):
            mesh = square
            for _ in range(int(rng.integers(1, 6))):
                count = int(rng.integers(1, mesh.n_elements + 1))
                mesh = refine(mesh, rng.choice(mesh.n_elements, size=count, replace=False))
            meshes.append(mesh)
        a, b = meshes
        common = overlay(a, b)
        _assert_valid(common, f"overlay trial {trial}")
        if common.n_elements > a.n_elements + b.n_elements - square.n_elements:
            raise AssertionError(
                f"overlay trial {trial}: {common.n_elements} elements exceed "
                f"{a.n_elements} + {b.n_elements} - {square.n_elements}"
            )
        if not (
            overlay(common, a).same_partition(common)
            and overlay(b, common).same_partition(common)
        ):
            raise AssertionError(f"overlay trial {trial}: overlay is not the finest of both")


def _check_validate_faults() -> None:
    from ailfem.mesh import Mesh, make_unit_square, validate

    square = make_unit_square()
    flipped = square.elements.copy()
    flipped[0] = flipped[0][[0, 2, 1]]
    broken = dataclasses.replace(square, elements=flipped)
    kinds = {diagnostic.kind for diagnostic in validate(broken)}
    if "orientation" not in kinds:
        raise AssertionError(f"flipped element not reported, got {kinds}")

    # lower half bisected, upper half not: (0.5, 0.5) hangs on the diagonal
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
    elements = np.array([[3, 0, 2], [4, 0, 1], [4, 1, 2]])
    flags = np.array([[False, True, True], [True, False, False], [True, False, False]])
    hanging = Mesh.from_triangles(vertices, elements, flags, longest_edge=False)
    kinds = {diagnostic.kind for diagnostic in validate(hanging)}
    if not {"conformity", "hanging_node"} <= kinds:
        raise AssertionError(f"hanging node not reported, got {kinds}")


def _check_mesh_files() -> None:
    from ailfem.mesh import dump_mesh, load_mesh, make_lshape_initial, refine

    mesh = refine(make_lshape_initial(), [0, 5, 17])
    with tempfile.TemporaryDirectory() as temp_dir:
        path = dump_mesh(mesh, Path(temp_dir) / "mesh.txt")
        loaded = load_mesh(path)
        if not (
            np.array_equal(loaded.vertices, mesh.vertices)
            and np.array_equal(loaded.elements, mesh.elements)
            and np.array_equal(loaded.boundary, mesh.boundary)
        ):
            raise AssertionError("mesh file does not reproduce the mesh")
        if loaded.initial is not None or int(loaded.generation.max()) != 0:
            raise AssertionError("a loaded mesh must be a new initial mesh")

        bad = Path(temp_dir) / "bad.txt"
        bad.write_text("vertices 3 elements 1\n0 0\n1 0\n0 1\n0 1 2 3 1 1 1\n", encoding="utf-8")
        _assert_raises(ValueError, lambda: load_mesh(bad), "invalid refinement edge")
        bad.write_text("vertices 3 elements 2\n0 0\n1 0\n0 1\n", encoding="utf-8")
        _assert_raises(ValueError, lambda: load_mesh(bad), "truncated mesh file")


def main() -> int:
    _check_initial_meshes()
    _check_refine()
    _check_genealogy()
    _check_single_triangle_classes()
    _check_refinement_axioms()
    _check_overlay()
    _check_validate_faults()
    _check_mesh_files()
    print("smoke_mesh: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
