"""Long-running acceptance checks on full adaptive runs.

Reproduces the convergence-rate, pre-asymptotic, quotient, cost and
iteration-count trends on the L-shape. Takes several minutes per scheme at
the default element budget; pass ``--max-elements`` to shorten it.
"""

import argparse
import sys
import time
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

SCHEMES = ("zarantonello", "kacanov", "newton")
OPTIMAL = (-0.6, -0.4)


def _assert_in_band(value: float, label: str, band: tuple[float, float] = OPTIMAL) -> None:
    low, high = band
    if not low <= value <= high:
        raise AssertionError(f"{label}: {value:.4f} outside [{low}, {high}]")


def _run(kind: str, *, delta_z: float, lambda_: float, max_elements: int):
    from ailfem.config import AdaptiveConfig
    from ailfem.engine import run_ailfem
    from ailfem.model import lshape_solution
    from ailfem.schemes import SchemeSpec

    config = AdaptiveConfig(
        theta=0.5,
        lambda_=lambda_,
        scheme=SchemeSpec(kind, delta_z=delta_z),
        max_elements=max_elements,
    )
    start = time.monotonic()
    history = run_ailfem(config, lshape_solution())
    print(
        f"  {kind:<13} delta_z={delta_z:g} lambda={lambda_:g}: {len(history.meshes())} meshes, "
        f"{len(history)} rows, {time.monotonic() - start:.1f}s"
    )
    return history


def _check_optimal_rates(max_elements: int) -> None:
    from ailfem.history import f4_quotient
    from ailfem.metrics.rates import effectivity_range, mesh_series, tail_slope
    from ailfem.model import default_model
    from ailfem.schemes import SchemeSpec
    from ailfem.theory import scheme_constants

    print("optimal rates (delta_z = 0.3, lambda = 0.1)")
    for kind in SCHEMES:
        history = _run(kind, delta_z=0.3, lambda_=0.1, max_elements=max_elements)
        elems = mesh_series(history, "elems")
        _assert_in_band(tail_slope(elems, mesh_series(history, "eta")), f"{kind}: eta slope")
        _assert_in_band(tail_slope(elems, mesh_series(history, "error")), f"{kind}: error slope")
        cost = mesh_series(history, "cum_elems")
        _assert_in_band(tail_slope(cost, mesh_series(history, "eta")), f"{kind}: cost slope")

        low, high = effectivity_range(history)
        print(f"    effectivity range [{low:.3f}, {high:.3f}]")
        if not (0.01 <= low and high <= 10.0):
            raise AssertionError(f"{kind}: effectivity range [{low}, {high}]")

        constants = scheme_constants(SchemeSpec(kind, delta_z=0.3), default_model())
        for N in history.meshes():
            quotient = f4_quotient(history, N)
            if quotient is None:
                continue
            if constants.energy_contraction_guaranteed and quotient < constants.C_H - 1e-8:
                raise AssertionError(f"{kind}: quotient {quotient:.6f} < C_H on mesh {N}")
            if not quotient > 0.0:
                raise AssertionError(f"{kind}: non-positive quotient on mesh {N}")


def _check_preasymptotic(max_elements: int) -> None:
    from ailfem.metrics.rates import mesh_series, tail_slope, window_slope

    print("pre-asymptotic phase (delta_z = 0.1, lambda = 0.5)")
    slopes = {}
    for kind in ("zarantonello", "kacanov"):
        history = _run(kind, delta_z=0.1, lambda_=0.5, max_elements=max_elements)
        elems, eta = mesh_series(history, "elems"), mesh_series(history, "eta")
        slopes[kind] = window_slope(elems, eta, upper=1e4)
        if kind == "zarantonello":
            _assert_in_band(tail_slope(elems, eta), "zarantonello: tail slope")
    print(f"    slopes below 1e4 elements: {slopes}")
    if not slopes["zarantonello"] >= slopes["kacanov"] + 0.05:
        raise AssertionError("Zarantonello shows no reduced pre-asymptotic rate")


def _check_iteration_counts(max_elements: int) -> None:
    from ailfem.metrics.rates import inner_step_counts, ordering_share

    print("inner iteration counts (delta_z = 0.3, lambda = 0.01)")
    counts = [
        inner_step_counts(_run(kind, delta_z=0.3, lambda_=0.01, max_elements=max_elements))
        for kind in SCHEMES
    ]
    share = ordering_share(*counts)
    print(f"    zarantonello >= kacanov >= newton on {share:.0%} of meshes")
    if not share >= 0.7:
        raise AssertionError(f"iteration ordering holds on only {share:.0%} of meshes")


def _check_fixed_mesh_contraction() -> None:
    from ailfem.fem import Discretization
    from ailfem.mesh import make_lshape_initial, uniform_refine
    from ailfem.model import lshape_solution
    from ailfem.reference import discrete_solution
    from ailfem.schemes import SchemeSpec, linearization_step
    from ailfem.theory import scheme_constants

    print("energy contraction on fixed meshes")
    solution = lshape_solution()
    mesh = make_lshape_initial()
    for target_size in (3000, 20000):
        while mesh.n_elements < target_size:
            mesh = uniform_refine(mesh)
        disc = Discretization.from_solution(mesh, solution)
        target = disc.energy(discrete_solution(disc, stagnation=0.0, max_steps=200).coefficients)
        for spec in (
            SchemeSpec("zarantonello", delta_z=0.1),
            SchemeSpec("zarantonello", delta_z=0.3),
            SchemeSpec("kacanov"),
        ):
            bound = scheme_constants(spec, solution.model).q_ctr ** 2
            u = disc.zero()
            gap = disc.energy(u.coefficients) - target
            worst = 0.0
            for _ in range(15):
                u = linearization_step(spec, disc, u).u
                following = disc.energy(u.coefficients) - target
                if gap < 1e-11:
                    break
                worst = max(worst, following / gap)
                gap = following
            print(f"  {mesh.n_elements} elements, {spec.label}: worst ratio {worst:.6f}")
            if worst > bound + 1e-10:
                raise AssertionError(f"{spec.label}: ratio {worst:.6f} > {bound:.6f}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--max-elements",
        type=int,
        default=200_000,
        help="Element budget of every adaptive run (default: 200000)",
    )
    args = parser.parse_args(argv)

    _check_fixed_mesh_contraction()
    _check_optimal_rates(args.max_elements)
    _check_preasymptotic(args.max_elements)
    _check_iteration_counts(args.max_elements)
    print("smoke_acceptance: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
