"""
Sparse SPD systems: triplet assembly into CSR, products and a Jacobi-PCG solver.
"""

import logging
from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

SparseMatrix = sp.csr_matrix

DEFAULT_REL_TOL = 1e-12

# residuals below this multiple of the rounding level of A @ x count as converged
_ROUNDING_FACTOR = 64.0


class SolverError(RuntimeError):
    """PCG stopped at its iteration cap without meeting the tolerance."""

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def assemble_coo(
    rows: np.ndarray,
    cols: np.ndarray,
    values: np.ndarray,
    n: int,
    *,
    symmetrize: bool = False,
) -> SparseMatrix:
    """Sum duplicate entries into an ``n x n`` CSR matrix with sorted rows.

    With ``symmetrize`` the result is ``(A + A^T) / 2``, which is symmetric to
    the last bit whatever order the duplicates were summed in.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if not (len(rows) == len(cols) == len(values)):
        raise ValueError("rows, cols and values must have the same length")
    if n < 0:
        raise ValueError(f"dimension must be non-negative, got {n}")
    if len(rows) and (
        rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n
    ):
        raise ValueError(f"triplet index out of range for dimension {n}")
    if not np.all(np.isfinite(values)):
        raise ValueError("triplet values must be finite")

    matrix = sp.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()
    if symmetrize:
        matrix = (0.5 * (matrix + matrix.T)).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def assemble_from_triplets(
    triplets: Iterable[tuple[int, int, float]], n: int
) -> SparseMatrix:
    entries = list(triplets)
    if not entries:
        return assemble_coo(np.empty(0), np.empty(0), np.empty(0), n)
    rows, cols, values = zip(*entries)
    if any(not float(r).is_integer() or not float(c).is_integer() for r, c in zip(rows, cols)):
        raise ValueError("triplet indices must be integers")
    return assemble_coo(np.array(rows), np.array(cols), np.array(values), n)


def spmv(matrix: SparseMatrix, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or matrix.shape[1] != len(x):
        raise ValueError(
            f"cannot multiply a {matrix.shape[0]}x{matrix.shape[1]} matrix "
            f"with a vector of shape {x.shape}"
        )
    return np.asarray(matrix @ x)


def solve_spd(
    matrix: SparseMatrix,
    b: np.ndarray,
    rel_tol: float = DEFAULT_REL_TOL,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Jacobi-preconditioned CG for ``matrix @ x = b``.

    Returns ``x`` with ``||b - A x|| <= max(rel_tol * ||b||, floor)`` where

        floor = 64 * eps * (|| |A| |x| || + ||b||)

    is the rounding level of the residual itself. A ``rel_tol`` below that
    floor is relaxed to it, so the plain ``rel_tol * ||b||`` bound only holds
    for tolerances above attainable accuracy. The recursive residual is
    re-checked against the true residual before returning. Raises
    ``SolverError`` after ``10 n`` iterations.
    """
    b = np.asarray(b, dtype=np.float64)
    n = matrix.shape[0]
    if matrix.shape != (n, n) or b.shape != (n,):
        raise ValueError(
            f"system of shape {matrix.shape} does not match right-hand side {b.shape}"
        )
    if not rel_tol > 0.0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")

    b_norm = float(np.linalg.norm(b))
    if n == 0 or b_norm == 0.0:
        return np.zeros(n)

    diagonal = matrix.diagonal()
    if np.any(diagonal <= 0.0):
        raise ValueError("matrix has a non-positive diagonal entry, it is not SPD")
    inverse_diagonal = 1.0 / diagonal
    absolute = abs(matrix)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"initial guess of shape {x.shape} does not match dimension {n}")

    target = rel_tol * b_norm
    cap = 10 * n
    iterations = 0
    residual_norm = np.inf
    while True:
        # (re)start from the true residual
        r = b - matrix @ x
        residual_norm = float(np.linalg.norm(r))
        floor = _ROUNDING_FACTOR * np.finfo(np.float64).eps * (
            float(np.linalg.norm(absolute @ np.abs(x))) + b_norm
        )
        if residual_norm <= max(target, floor):
            logger.debug(
                "pcg: n=%d converged after %d iterations, residual %.3e",
                n,
                iterations,
                residual_norm,
            )
            return x
        if iterations >= cap:
            raise SolverError(
                f"PCG did not converge in {iterations} iterations "
                f"(residual {residual_norm:.3e}, target {target:.3e})",
                residual=residual_norm,
                iterations=iterations,
            )

        z = inverse_diagonal * r
        p = z.copy()
        rz = float(r @ z)
        while iterations < cap:
            q = matrix @ p
            curvature = float(p @ q)
            if curvature <= 0.0:
                raise ValueError("matrix is not positive definite")
            alpha = rz / curvature
            x += alpha * p
            r -= alpha * q
            iterations += 1
            if float(np.linalg.norm(r)) <= max(target, floor):
                break
            z = inverse_diagonal * r
            rz_next = float(r @ z)
            p = z + (rz_next / rz) * p
            rz = rz_next
