"""Smoke-check for the reference energy used by the contraction factors."""

import math
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_close(actual: float, expected: float, label: str, tol: float) -> None:
    if not math.isclose(actual, expected, rel_tol=0.0, abs_tol=tol):
        raise AssertionError(f"{label}: expected {expected!r}, got {actual!r}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


def _check_bubble() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_unit_square, uniform_refine
    from ailfem.model import BUBBLE_LINEAR_ENERGY, square_polynomial_solution
    from ailfem.reference import (
        ReferenceEnergyError,
        discrete_solution,
        quadrature_energy,
        reference_energy,
    )

    bubble = square_polynomial_solution()
    square = make_unit_square()

    mesh = square
    while mesh.n_elements < 2048:
        mesh = uniform_refine(mesh)
    _assert_close(quadrature_energy(bubble, mesh), BUBBLE_LINEAR_ENERGY, "bubble quadrature", 1e-8)

    plain = reference_energy(bubble, square, cross_check=False)
    _assert_close(plain.value, BUBBLE_LINEAR_ENERGY, "bubble reference", 1e-8)
    if plain.extrapolated is not None or plain.discrepancy is not None:
        raise AssertionError("no extrapolation without the cross-check")
    if plain.quadrature_elements < 10_000:
        raise AssertionError("quadrature mesh below the budget")

    checked = reference_energy(bubble, square, rtol=1e-3)
    if checked.extrapolated is None or len(checked.fitted_meshes) < 2:
        raise AssertionError("cross-check must fit the extrapolation")
    _assert_close(checked.extrapolated, BUBBLE_LINEAR_ENERGY, "bubble extrapolation", 1e-5)
    _assert_raises(
        ReferenceEnergyError,
        lambda: reference_energy(bubble, square, rtol=0.0),
        "zero tolerance cross-check",
    )

    # discrete energies on nested meshes stay above E(u*)
    mesh = square
    for _ in range(4):
        mesh = uniform_refine(mesh)
        disc = Discretization.from_solution(mesh, bubble)
        value = disc.energy(discrete_solution(disc).coefficients)
        if not value > plain.value:
            raise AssertionError(f"discrete energy {value} below E(u*) on {mesh.n_elements}")


def _check_lshape() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial, uniform_refine
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution, reference_energy

    solution = lshape_solution()
    initial = make_lshape_initial()
    _assert_raises(ValueError, lambda: reference_energy(solution, initial, 5000), "small budget")

    reference = reference_energy(solution, initial, cross_check=False)
    if not math.isfinite(reference.value):
        raise AssertionError("L-shape reference energy is not finite")
    _assert_close(reference.value, -0.7749106, "L-shape reference energy", 1e-5)

    # quadrature agrees with the extrapolated discrete energies
    checked = reference_energy(solution, initial)
    if checked.extrapolated is None or checked.discrepancy is None:
        raise AssertionError("L-shape cross-check did not extrapolate")
    _assert_close(checked.value, reference.value, "cross-checked value", 0.0)
    if abs(checked.discrepancy) > 1e-4 * abs(checked.value):
        raise AssertionError(f"L-shape cross-check discrepancy {checked.discrepancy:.3e}")

    # doubling the budget barely moves the value
    doubled = reference_energy(solution, initial, 20_000, cross_check=False)
    if not doubled.quadrature_elements > reference.quadrature_elements:
        raise AssertionError("doubled budget did not refine further")
    change = abs(doubled.value - reference.value) / abs(doubled.value)
    if change > 1e-5:
        raise AssertionError(f"doubling the budget changed the energy by {change:.3e} relative")
    mesh = initial
    for _ in range(3):
        disc = Discretization.from_solution(mesh, solution)
        value = disc.energy(discrete_solution(disc).coefficients)
        if not value > reference.value:
            raise AssertionError(f"discrete energy {value} below {reference.value}")
        mesh = uniform_refine(mesh)


def main() -> int:
    _check_bubble()
    _check_lshape()
    print("smoke_reference: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
