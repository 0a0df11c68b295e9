"""Smoke-check for the residual error indicators and Doerfler marking."""

import math
import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_close(actual: float, expected: float, label: str, tol: float = 1e-12) -> None:
    if not math.isclose(actual, expected, rel_tol=tol, abs_tol=tol):
        raise AssertionError(f"{label}: expected {expected!r}, got {actual!r}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


def _fan(count: int):
    """``count`` triangles around the origin."""
    from ailfem.mesh import Mesh

    angles = 2.0 * np.pi * np.arange(count) / count
    vertices = np.vstack([[0.0, 0.0], np.column_stack([np.cos(angles), np.sin(angles)])])
    elements = [[0, 1 + k, 1 + (k + 1) % count] for k in range(count)]
    return Mesh.from_triangles(vertices, np.array(elements))


def _constant(value: float):
    return lambda points: np.full(np.shape(points)[:-1], value)


def _check_indicators() -> None:
    from ailfem.estimator import IndicatorField, local_indicators, subset_total, total
    from ailfem.fem import Discretization, FeFunction, build_dof_map, interpolate
    from ailfem.mesh import make_lshape_initial, make_triangle, make_unit_square, uniform_refine
    from ailfem.model import default_model, linear_model

    triangle = make_triangle()
    disc = Discretization(triangle, linear_model(), _constant(1.0))
    field = local_indicators(disc, disc.zero())
    _assert_close(float(field.values[0]), 0.25, "volume term on the unit triangle")

    # hat function on the criss-crossed square: every interior edge carries the same jump
    square = uniform_refine(make_unit_square())
    disc = Discretization(square, linear_model(), _constant(0.0))
    hat = FeFunction(square, build_dof_map(square), np.ones(1))
    field = local_indicators(disc, hat)
    if not np.allclose(field.values, 4.0 * math.sqrt(2.0), rtol=1e-13, atol=0.0):
        raise AssertionError(f"hat indicators {field.values} differ from 4 sqrt(2)")

    # a linear function has zero jumps wherever all neighbours see the same gradient
    lshape = make_lshape_initial()
    disc = Discretization(lshape, default_model(), _constant(0.0))
    linear = interpolate(lshape, lambda p: 0.3 * p[:, 0] - 0.7 * p[:, 1])
    values = local_indicators(disc, linear).values
    inside = ~lshape.boundary_vertex_mask[lshape.elements].any(axis=1)
    topology = lshape.topology
    neighbours = topology.edge_elements[topology.element_edges]  # (ne, 3, 2)
    patch = [
        element
        for element in np.flatnonzero(inside).tolist()
        if all(inside[other] for other in neighbours[element].ravel().tolist() if other >= 0)
    ]
    if not patch:
        raise AssertionError("no element with an all-interior neighbourhood")
    if np.max(values[patch]) > 1e-24:
        raise AssertionError("linear function produced jumps inside its patch")

    field = IndicatorField(make_unit_square(), np.array([9.0, 16.0]))
    _assert_close(total(field), 5.0, "Pythagorean total")
    _assert_close(subset_total(field, []), 0.0, "empty subset")
    _assert_close(subset_total(field, [0, 1]), total(field), "full subset")
    _assert_close(subset_total(field, [1]), 4.0, "singleton subset")
    _assert_raises(ValueError, lambda: subset_total(field, [2]), "subset index out of range")
    _assert_close(total(IndicatorField(make_unit_square(), np.zeros(2))), 0.0, "zero field")
    _assert_raises(
        ValueError,
        lambda: IndicatorField(make_unit_square(), np.array([1.0, -1.0])),
        "negative indicator",
    )


def _check_stability_and_reduction() -> None:
    from ailfem.estimator import local_indicators
    from ailfem.fem import Discretization, FeFunction, build_dof_map, prolongate
    from ailfem.mesh import make_unit_square, refine, uniform_refine
    from ailfem.model import square_polynomial_solution

    solution = square_polynomial_solution()
    coarse_mesh = make_unit_square()
    for _ in range(5):
        coarse_mesh = uniform_refine(coarse_mesh)
    coarse_disc = Discretization.from_solution(coarse_mesh, solution)
    rng = np.random.default_rng(17)
    marked = rng.choice(coarse_mesh.n_elements, size=6, replace=False)
    fine_mesh = refine(coarse_mesh, marked)
    fine_disc = Discretization.from_solution(fine_mesh, solution)

    for trial in range(5):
        coarse = FeFunction(
            coarse_mesh,
            build_dof_map(coarse_mesh),
            rng.standard_normal(coarse_disc.n_dofs) * 0.05,
        )
        fine = prolongate(coarse, fine_mesh, fine_disc.dofmap)
        eta_coarse = local_indicators(coarse_disc, coarse).values
        eta_fine = local_indicators(fine_disc, fine).values

        n = coarse_mesh.n_elements
        unrefined = np.all(fine_mesh.elements[:n] == coarse_mesh.elements, axis=1) & (
            fine_mesh.node_ids[:n] == coarse_mesh.node_ids
        )
        topology = coarse_mesh.topology
        neighbours = topology.edge_elements[topology.element_edges].reshape(n, -1)
        untouched = [
            element
            for element in np.flatnonzero(unrefined).tolist()
            if all(unrefined[other] for other in neighbours[element].tolist() if other >= 0)
        ]
        if not np.array_equal(eta_fine[untouched], eta_coarse[untouched]):
            raise AssertionError(f"trial {trial}: indicators changed on untouched elements")

        refined = np.flatnonzero(~unrefined)
        children = np.isin(fine_mesh.parents, refined) & ~np.isin(
            np.arange(fine_mesh.n_elements), np.flatnonzero(unrefined)
        )
        reduced = float(np.sum(eta_fine[children]))
        original = float(np.sum(eta_coarse[refined]))
        if reduced > 2.0 ** -0.5 * original * (1.0 + 1e-12):
            raise AssertionError(
                f"trial {trial}: reduction {math.sqrt(reduced / original):.4f} > 2^(-1/4)"
            )


def _check_doerfler() -> None:
    from ailfem.estimator import IndicatorField, subset_total, total
    from ailfem.marking import doerfler

    mesh = _fan(5)
    field = IndicatorField(mesh, np.array([4.0, 1.0, 1.0, 1.0, 1.0]))
    if list(doerfler(field, 0.5)) != [0]:
        raise AssertionError("theta = 0.5 must mark exactly the largest indicator")

    sparse = IndicatorField(mesh, np.array([4.0, 0.0, 1.0, 0.0, 2.0]))
    if list(doerfler(sparse, 1.0)) != [0, 2, 4]:
        raise AssertionError("theta = 1 must mark every positive indicator")
    if len(doerfler(IndicatorField(mesh, np.zeros(5)), 0.5)):
        raise AssertionError("a zero field must give an empty mark set")

    ties = IndicatorField(mesh, np.ones(5))
    if list(doerfler(ties, 0.5)) != [0, 1]:
        raise AssertionError("ties must be broken by ascending element index")
    _assert_raises(ValueError, lambda: doerfler(ties, 0.0), "theta = 0")
    _assert_raises(ValueError, lambda: doerfler(ties, 1.5), "theta > 1")

    rng = np.random.default_rng(23)
    big = _fan(40)
    for trial in range(50):
        values = rng.exponential(size=40) ** 3
        field = IndicatorField(big, values)
        theta = float(rng.uniform(0.05, 1.0))
        marked = doerfler(field, theta)
        goal = theta * total(field)
        if subset_total(field, marked) < goal * (1.0 - 1e-12):
            raise AssertionError(f"trial {trial}: Doerfler criterion violated")
        weakest = min(marked, key=lambda element: (values[element], -element))
        rest = [element for element in marked if element != weakest]
        if subset_total(field, rest) >= goal:
            raise AssertionError(f"trial {trial}: marked set is not minimal")


def main() -> int:
    _check_indicators()
    _check_stability_and_reduction()
    _check_doerfler()
    print("smoke_estimator: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
