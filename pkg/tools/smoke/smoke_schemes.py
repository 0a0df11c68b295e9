"""Smoke-check for the linearization schemes and their contraction constants."""

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


def _check_constants() -> None:
    from ailfem.model import default_model
    from ailfem.schemes import SchemeSpec
    from ailfem.theory import scheme_constants

    model = default_model()
    zarantonello = scheme_constants(SchemeSpec("zarantonello", delta_z=0.1), model)
    _assert_close(zarantonello.C_H, 7.0, "Zarantonello C_H", tol=1e-12)
    _assert_close(zarantonello.q_ctr, 0.996416, "Zarantonello q_ctr", tol=1e-6)
    _assert_close(zarantonello.q_ctr**2, 0.992845, "Zarantonello q_ctr^2", tol=1e-6)
    if not zarantonello.energy_contraction_guaranteed:
        raise AssertionError("Zarantonello with delta 0.1 contracts in energy")
    if zarantonello.norm_contraction_guaranteed or zarantonello.norm_contraction_factor < 1.0:
        raise AssertionError("Zarantonello with delta 0.1 has no guaranteed norm contraction")

    kacanov = scheme_constants(SchemeSpec("kacanov"), model)
    _assert_close(kacanov.C_H, 0.5, "Kacanov C_H")
    _assert_close(kacanov.beta, 2.0, "Kacanov beta")
    _assert_close(kacanov.q_ctr, 0.993591, "Kacanov q_ctr", tol=1e-6)
    if not kacanov.lambda_opt > 0.0:
        raise AssertionError("Kacanov must have a positive lambda_opt")

    newton = scheme_constants(SchemeSpec("newton"), model)
    if newton.energy_contraction_guaranteed or newton.q_ctr != 1.0 or newton.lambda_opt != 0.0:
        raise AssertionError("undamped Newton has no guaranteed contraction")

    _assert_raises(
        ValueError, lambda: SchemeSpec("zarantonello", delta_z=0.5).validate_for(model), "delta 0.5"
    )
    _assert_raises(ValueError, lambda: SchemeSpec("picard"), "unknown scheme")
    _assert_raises(ValueError, lambda: SchemeSpec("newton", newton_damping=0.0), "zero damping")
    _assert_raises(ValueError, lambda: scheme_constants(SchemeSpec("kacanov"), model, 0.0), "C_stb")


def _check_fixed_point_and_contraction() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial, refine
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution
    from ailfem.schemes import SchemeSpec, assemble_linearized, linearization_step
    from ailfem.theory import scheme_constants

    rng = np.random.default_rng(17)
    solution = lshape_solution()
    meshes = [make_lshape_initial()]
    centroids = meshes[0].corners.mean(axis=1)
    meshes.append(refine(meshes[0], np.flatnonzero(np.hypot(*centroids.T) < 0.5)))

    for mesh in meshes:
        disc = Discretization.from_solution(mesh, solution)
        minimizer = discrete_solution(disc, stagnation=0.0, max_steps=200)
        target = disc.energy(minimizer.coefficients)

        for kind in ("zarantonello", "kacanov", "newton"):
            spec = SchemeSpec(kind)
            following = linearization_step(spec, disc, minimizer).u
            change = disc.x_norm(following.coefficients - minimizer.coefficients)
            if change > 1e-9:
                raise AssertionError(f"{kind}: minimizer moved by {change:.3e}")
            matrix, rhs = assemble_linearized(spec, disc, minimizer)
            if abs(matrix - matrix.T).max() != 0.0 or rhs.shape != (disc.n_dofs,):
                raise AssertionError(f"{kind}: linearized system is not symmetric")
            # positive definite at the minimizer and at a rough iterate
            rough = disc.zero().with_coefficients(5.0 * rng.standard_normal(disc.n_dofs))
            for point in (minimizer, rough):
                matrix, _ = assemble_linearized(spec, disc, point)
                vectors = rng.standard_normal((100, disc.n_dofs))
                quadratic = np.einsum("ij,ij->i", vectors, (matrix @ vectors.T).T)
                if not np.all(quadratic > 0.0):
                    raise AssertionError(f"{kind}: x^T A x <= 0 for a random x")

        # energy contraction on a fixed mesh
        for spec in (
            SchemeSpec("zarantonello", delta_z=0.1),
            SchemeSpec("zarantonello", delta_z=0.3),
            SchemeSpec("kacanov"),
        ):
            bound = scheme_constants(spec, solution.model).q_ctr ** 2
            u = disc.zero()
            gap = disc.energy(u.coefficients) - target
            for step in range(15):
                u = linearization_step(spec, disc, u).u
                following = disc.energy(u.coefficients) - target
                if gap < 1e-11:
                    break
                if following / gap > bound + 1e-10:
                    raise AssertionError(
                        f"{spec.label} step {step}: ratio {following / gap:.6f} > {bound:.6f}"
                    )
                gap = following


def _check_energy_sandwich() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution

    solution = lshape_solution()
    disc = Discretization.from_solution(make_lshape_initial(), solution)
    minimizer = discrete_solution(disc, stagnation=0.0, max_steps=200)
    target = disc.energy(minimizer.coefficients)
    nu, L_F = solution.model.nu, solution.model.L_F
    rng = np.random.default_rng(31)
    for trial in range(50):
        perturbation = 10.0 ** rng.uniform(-3, 0.5) * rng.standard_normal(disc.n_dofs)
        distance = disc.x_norm(perturbation) ** 2
        gap = disc.energy(minimizer.coefficients + perturbation) - target
        slack = 1e-12 * max(1.0, abs(target))
        if not 0.5 * nu * distance - slack <= gap <= 0.5 * L_F * distance + slack:
            raise AssertionError(
                f"trial {trial}: energy gap {gap:.6e} outside "
                f"[{0.5 * nu * distance:.6e}, {0.5 * L_F * distance:.6e}]"
            )


def _check_iterate_bound() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution
    from ailfem.schemes import SchemeSpec, linearization_step
    from ailfem.theory import scheme_constants

    solution = lshape_solution()
    disc = Discretization.from_solution(make_lshape_initial(), solution)
    minimizer = discrete_solution(disc, stagnation=0.0, max_steps=200).coefficients
    for kind in ("zarantonello", "kacanov", "newton"):
        u = disc.zero()
        for step in range(20):
            result = linearization_step(SchemeSpec(kind), disc, u)
            # damped Newton is bounded with the damping it accepted
            spec = SchemeSpec(kind, newton_damping=result.damping or 1.0)
            factor = scheme_constants(spec, solution.model).aposteriori_factor
            error = disc.x_norm(minimizer - u.coefficients)
            increment = disc.x_norm(result.u.coefficients - u.coefficients)
            if error > factor * increment + 1e-10:
                raise AssertionError(
                    f"{kind} step {step}: error {error:.3e} > {factor:.3f} * {increment:.3e}"
                )
            u = result.u


def _check_newton_damping() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial
    from ailfem.model import lshape_solution
    from ailfem.schemes import SchemeSpec, linearization_step

    disc = Discretization.from_solution(make_lshape_initial(), lshape_solution())
    u = disc.zero()
    energy = disc.energy(u.coefficients)
    for _ in range(6):
        result = linearization_step(SchemeSpec("newton"), disc, u)
        if not 0.0 < result.damping <= 1.0:
            raise AssertionError(f"accepted damping {result.damping} outside (0, 1]")
        if result.energy > energy + 1e-12 * max(1.0, abs(energy)):
            raise AssertionError("damped Newton increased the energy")
        u, energy = result.u, result.energy

    plain = linearization_step(
        SchemeSpec("newton", newton_damping=0.5, newton_correction=False), disc, disc.zero()
    )
    if plain.damping != 0.5 or plain.halvings != 0:
        raise AssertionError("uncorrected Newton must keep the initial damping")


def main() -> int:
    _check_constants()
    _check_fixed_point_and_contraction()
    _check_energy_sandwich()
    _check_iterate_bound()
    _check_newton_damping()
    print("smoke_schemes: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
