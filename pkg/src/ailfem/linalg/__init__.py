from ailfem.linalg.sparse import (
    DEFAULT_REL_TOL,
    SolverError,
    SparseMatrix,
    assemble_coo,
    assemble_from_triplets,
    solve_spd,
    spmv,
)

__all__ = [
    "DEFAULT_REL_TOL",
    "SolverError",
    "SparseMatrix",
    "assemble_coo",
    "assemble_from_triplets",
    "solve_spd",
    "spmv",
]
