"""Smoke-check for P1 spaces, quadrature, energy, residual and prolongation."""

import math
import sys
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


def _random_lshape_points(rng: np.random.Generator, count: int) -> np.ndarray:
    points = rng.uniform(-1.0, 1.0, size=(4 * count, 2))
    inside = ~((points[:, 0] > 0.0) & (points[:, 1] < 0.0))
    return points[inside][:count]


def _check_quadrature() -> None:
    from ailfem.fem import CENTROID, DEGREE5

    corners = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    areas = np.array([0.5])
    points = DEGREE5.points(corners)[0]
    for a in range(6):
        for b in range(6 - a):
            value = DEGREE5.integrate((points[:, 0] ** a * points[:, 1] ** b)[None, :], areas)
            exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
            _assert_close(float(value[0]), exact, f"degree-5 rule on x^{a} y^{b}", tol=1e-14)
    _assert_close(float(DEGREE5.weights.sum()), 1.0, "degree-5 weights")
    _assert_close(float(CENTROID.integrate(np.ones((1, 1)), areas)[0]), 0.5, "centroid rule")
    composite = DEGREE5.subdivided(3)
    _assert_equal(composite.n_points, DEGREE5.n_points * 64, "composite rule size")
    _assert_close(float(composite.weights.sum()), 1.0, "composite weights")


def _check_singular_quadrature() -> None:
    from ailfem.fem import DEGREE5, graded_quadrature
    from ailfem.mesh import make_lshape_initial
    from ailfem.model import lshape_solution

    solution = lshape_solution()
    mesh = make_lshape_initial()
    corner = np.flatnonzero(np.all(mesh.vertices[mesh.elements] == 0.0, axis=2).any(axis=1))
    if not len(corner):
        raise AssertionError("no element touches the re-entrant corner")

    def density(points: np.ndarray) -> np.ndarray:
        gradient = solution.gradient(points)
        s = np.sum(gradient * gradient, axis=-1)
        return solution.model.psi(s) - solution.load(points) * solution.value(points)

    graded = graded_quadrature(mesh, solution.singular_point)
    graded_values = graded.integrate(density(graded.points), mesh.n_elements)[corner]

    def composite(levels: int) -> np.ndarray:
        rule = DEGREE5.subdivided(levels)
        corners = mesh.corners[corner]
        values = density(rule.points(corners).reshape(-1, 2)).reshape(len(corner), -1)
        return rule.integrate(values, mesh.areas[corner])

    coarse, finer = composite(3), composite(5)
    coarse_gap = np.abs(coarse - graded_values)
    finer_gap = np.abs(finer - graded_values)
    relative = coarse_gap / np.abs(graded_values)
    if relative.max() > 0.1:
        raise AssertionError(f"3-level composite rule is off by {relative.max():.3e} relative")
    if not np.all(finer_gap < coarse_gap):
        raise AssertionError("deeper subdivision does not approach the graded rule")


def _check_dofs_and_gradients() -> None:
    from ailfem.fem import FeFunction, build_dof_map, gradient_field, interpolate
    from ailfem.mesh import make_lshape_initial, make_unit_square, uniform_refine

    square = make_unit_square()
    _assert_equal(build_dof_map(square).n_dofs, 0, "square dofs")
    refined = uniform_refine(square)
    _assert_equal(refined.n_vertices, 5, "refined square vertices")
    _assert_equal(build_dof_map(refined).n_dofs, 1, "refined square dofs")

    mesh = make_lshape_initial()
    zero = FeFunction.zero(mesh)
    if np.any(gradient_field(mesh, zero) != 0.0):
        raise AssertionError("gradient of zero must vanish")

    linear = interpolate(mesh, lambda p: p[:, 0])
    interior = ~mesh.boundary_vertex_mask[mesh.elements].any(axis=1)
    if not interior.any():
        raise AssertionError("L-shape has no all-interior elements")
    grads = gradient_field(mesh, linear)[interior]
    if not np.allclose(grads, [1.0, 0.0], atol=1e-13):
        raise AssertionError("P1 must reproduce the gradient of x on interior elements")

    # elementwise gradients against a direct evaluation
    rng = np.random.default_rng(11)
    u = FeFunction(mesh, build_dof_map(mesh), rng.standard_normal(81))
    field = gradient_field(mesh, u)
    for element in (0, 57, 191):
        p = mesh.corners[element]
        values = u.nodal_values()[mesh.elements[element]]
        matrix = np.array([p[1] - p[0], p[2] - p[0]])
        direct = np.linalg.solve(matrix, [values[1] - values[0], values[2] - values[0]])
        if not np.allclose(field[element], direct, atol=1e-12):
            raise AssertionError(f"gradient of element {element} differs from direct solve")


def _check_functionals() -> None:
    from ailfem.fem import (
        Discretization,
        FeFunction,
        energy,
        h1_seminorm_error,
        residual,
    )
    from ailfem.mesh import make_lshape_initial
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution

    mesh = make_lshape_initial()
    solution = lshape_solution()
    disc = Discretization.from_solution(mesh, solution)
    zero = disc.zero()
    _assert_close(energy(disc, zero), 0.0, "energy of zero")
    if not np.array_equal(residual(disc, zero), -disc.load_vector):
        raise AssertionError("residual of zero must be minus the load vector")

    flat = Discretization(
        mesh, solution.model, solution.load, lambda p: np.zeros(p.shape[:-1] + (2,))
    )
    _assert_close(h1_seminorm_error(flat, flat.zero()), 0.0, "error of zero against zero")

    minimizer = discrete_solution(disc, stagnation=0.0, max_steps=200)
    if np.max(np.abs(residual(disc, minimizer))) > 1e-10:
        raise AssertionError("residual of the discrete minimizer does not vanish")
    best = energy(disc, minimizer)
    rng = np.random.default_rng(5)
    for trial in range(20):
        scale = 10.0 ** rng.uniform(-4, 0)
        other = minimizer.with_coefficients(
            minimizer.coefficients + scale * rng.standard_normal(disc.n_dofs)
        )
        if energy(disc, other) < best:
            raise AssertionError(f"perturbation {trial} has lower energy than the minimizer")

    foreign = FeFunction.zero(make_lshape_initial())
    try:
        energy(disc, foreign)
    except ValueError:
        pass
    else:
        raise AssertionError("functions on another mesh must be rejected")


def _check_bubble_convergence() -> None:
    from ailfem.fem import Discretization, h1_seminorm_error
    from ailfem.mesh import make_unit_square, uniform_refine
    from ailfem.metrics.rates import loglog_slope
    from ailfem.model import BUBBLE_LINEAR_ENERGY, square_polynomial_solution
    from ailfem.reference import discrete_solution

    solution = square_polynomial_solution()
    mesh = make_unit_square()
    for _ in range(4):
        mesh = uniform_refine(mesh)
    sizes, errors, energies = [], [], []
    for _ in range(6):
        disc = Discretization.from_solution(mesh, solution)
        u = discrete_solution(disc)
        sizes.append(mesh.n_elements)
        errors.append(h1_seminorm_error(disc, u))
        energies.append(disc.energy(u.coefficients))
        mesh = uniform_refine(mesh)

    slope = loglog_slope(sizes, errors)
    if not -0.6 <= slope <= -0.4:
        raise AssertionError(f"uniform refinement error slope {slope:.3f} is not about -1/2")
    if any(later > earlier + 1e-14 for earlier, later in zip(energies, energies[1:])):
        raise AssertionError("discrete energies must decrease on nested meshes")
    if not all(value > BUBBLE_LINEAR_ENERGY for value in energies):
        raise AssertionError("discrete energies must stay above the exact energy")


def _check_prolongation() -> None:
    from ailfem.fem import (
        Discretization,
        FeFunction,
        build_dof_map,
        energy,
        gradient_field,
        prolongate,
    )
    from ailfem.mesh import make_lshape_initial, make_unit_square, refine
    from ailfem.model import default_model

    coarse_mesh = make_lshape_initial()
    rng = np.random.default_rng(2)
    coarse = FeFunction(coarse_mesh, build_dof_map(coarse_mesh), rng.standard_normal(81))
    middle_mesh = refine(coarse_mesh, [3, 40, 99, 150])
    fine_mesh = refine(middle_mesh, [0, 1, 2, 195])
    fine = prolongate(coarse, fine_mesh)
    points = _random_lshape_points(rng, 100)
    difference = np.max(np.abs(fine.evaluate(points) - coarse.evaluate(points)))
    if difference > 1e-13:
        raise AssertionError(f"prolongation changed point values by {difference:.3e}")

    # children carry their ancestor's gradient
    ancestors = middle_mesh.parents[fine_mesh.parents]
    inherited = gradient_field(coarse_mesh, coarse)[ancestors]
    if not np.allclose(gradient_field(fine_mesh, fine), inherited, rtol=0.0, atol=1e-12):
        raise AssertionError("a child gradient differs from its parent's")

    # the energy only sees the function, not the mesh
    model = default_model()

    def unit_load(p: np.ndarray) -> np.ndarray:
        return np.ones(p.shape[:-1])

    coarse_disc = Discretization(coarse_mesh, model, unit_load)
    fine_disc = Discretization(fine_mesh, model, unit_load)
    _assert_close(
        energy(fine_disc, fine), energy(coarse_disc, coarse), "energy after prolongation", 1e-10
    )
    _assert_close(
        fine_disc.x_norm(fine.coefficients),
        coarse_disc.x_norm(coarse.coefficients),
        "gradient norm after prolongation",
        1e-12,
    )

    if prolongate(coarse, coarse_mesh) is not coarse:
        raise AssertionError("prolongation onto the same mesh must return the function")
    try:
        prolongate(coarse, make_unit_square())
    except ValueError:
        pass
    else:
        raise AssertionError("prolongation onto an unrelated mesh must fail")
    try:
        fine.evaluate(np.array([[0.5, -0.5]]))
    except ValueError:
        pass
    else:
        raise AssertionError("evaluation outside the domain must fail")


def main() -> int:
    _check_quadrature()
    _check_singular_quadrature()
    _check_dofs_and_gradients()
    _check_functionals()
    _check_bubble_convergence()
    _check_prolongation()
    print("smoke_fem: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
