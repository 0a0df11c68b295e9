"""Smoke-check for sparse assembly, products and the PCG solver."""

import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_allclose(actual, expected, label: str, atol: float = 1e-12) -> None:
    if not np.allclose(actual, expected, rtol=0.0, atol=atol):
        raise AssertionError(f"{label}: expected {expected}, got {actual}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


def main() -> int:
    from ailfem.fem import Discretization
    from ailfem.linalg import assemble_coo, assemble_from_triplets, solve_spd, spmv
    from ailfem.mesh import make_lshape_initial, uniform_refine
    from ailfem.model import lshape_solution

    duplicate = assemble_from_triplets([(0, 0, 1.0), (0, 0, 1.0)], 1)
    _assert_allclose(duplicate.toarray(), [[2.0]], "duplicate summation")

    pattern = assemble_from_triplets([(0, 1, 1.0), (1, 0, 1.0)], 2)
    if (pattern != pattern.T).nnz:
        raise AssertionError("mirrored triplets must give a symmetric matrix")

    zero = assemble_from_triplets([], 3)
    _assert_allclose(zero.toarray(), np.zeros((3, 3)), "empty triplets")
    _assert_allclose(spmv(zero, np.arange(3.0)), np.zeros(3), "zero matrix product")
    _assert_raises(ValueError, lambda: assemble_from_triplets([(0, 3, 1.0)], 3), "column range")
    _assert_raises(ValueError, lambda: assemble_from_triplets([(-1, 0, 1.0)], 3), "negative row")

    identity = assemble_coo(np.arange(4), np.arange(4), np.ones(4), 4)
    x = np.array([1.0, -2.0, 3.5, 0.25])
    _assert_allclose(spmv(identity, x), x, "identity product")
    _assert_allclose(solve_spd(identity, x), x, "identity solve")

    two = assemble_from_triplets([(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)], 2)
    _assert_allclose(spmv(two, np.ones(2)), [3.0, 3.0], "2x2 product")
    _assert_allclose(spmv(two, np.zeros(2)), [0.0, 0.0], "product with zero")
    _assert_allclose(solve_spd(two, np.array([3.0, 3.0])), [1.0, 1.0], "2x2 solve")
    _assert_allclose(solve_spd(two, np.zeros(2)), [0.0, 0.0], "zero right-hand side")
    _assert_raises(ValueError, lambda: spmv(two, np.ones(3)), "dimension mismatch")
    _assert_raises(ValueError, lambda: solve_spd(two, np.ones(3)), "solve dimension mismatch")

    # symmetrized assembly of a stiffness matrix
    mesh = uniform_refine(uniform_refine(make_lshape_initial()))
    disc = Discretization.from_solution(mesh, lshape_solution())
    stiffness = disc.stiffness
    if abs(stiffness - stiffness.T).max() != 0.0:
        raise AssertionError("assembled stiffness matrix is not exactly symmetric")

    rng = np.random.default_rng(3)
    b = rng.standard_normal(disc.n_dofs)
    solution = solve_spd(stiffness, b, 1e-10)
    relative = np.linalg.norm(b - stiffness @ solution) / np.linalg.norm(b)
    if relative > 1e-10:
        raise AssertionError(f"PCG residual {relative:.3e} above tolerance")
    # below attainable accuracy the solver still returns
    tight = solve_spd(stiffness, b, 1e-300)
    relative = np.linalg.norm(b - stiffness @ tight) / np.linalg.norm(b)
    if relative > 1e-11:
        raise AssertionError(f"tight tolerance solve stopped at residual {relative:.3e}")
    floor = 64.0 * np.finfo(np.float64).eps * (
        np.linalg.norm(abs(stiffness) @ np.abs(tight)) + np.linalg.norm(b)
    )
    if np.linalg.norm(b - stiffness @ tight) > floor:
        raise AssertionError("tight tolerance solve stopped above the rounding floor")

    print("smoke_linalg: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
