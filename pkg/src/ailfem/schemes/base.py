"""
Iterative linearization schemes.

Each scheme turns the current iterate ``u^n`` into an SPD system whose
solution is ``u^{n+1}``. The engine only sees :class:`LinearizationScheme`.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.fem.space import FeFunction
from ailfem.linalg.sparse import DEFAULT_REL_TOL, SparseMatrix, solve_spd
from ailfem.model.problem import NonlinearModel

logger = logging.getLogger(__name__)

SCHEME_KINDS = ("zarantonello", "kacanov", "newton")


class StepFailure(RuntimeError):
    """A linearization step could not produce an acceptable iterate."""

    def __init__(self, message: str, *, damping: float, halvings: int):
        super().__init__(message)
        self.damping = damping
        self.halvings = halvings


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    delta_z: float = 0.3
    newton_damping: float = 1.0
    newton_correction: bool = True

    def __post_init__(self) -> None:
        kind = self.kind.strip().lower()
        if kind not in SCHEME_KINDS:
            raise ValueError(
                f"Unknown scheme {self.kind!r}. Available: {', '.join(SCHEME_KINDS)}"
            )
        object.__setattr__(self, "kind", kind)
        if not self.delta_z > 0.0:
            raise ValueError(f"delta_z must be positive, got {self.delta_z}")
        if not 0.0 < self.newton_damping <= 1.0:
            raise ValueError(
                f"newton_damping must lie in (0, 1], got {self.newton_damping}"
            )

    def validate_for(self, model: NonlinearModel) -> None:
        """Raise ``ValueError`` when the step size is outside the admissible range."""
        if self.kind == "zarantonello":
            bound = 2.0 / (3.0 * model.M_mu)
            if not self.delta_z < bound:
                raise ValueError(
                    f"delta_z must lie in (0, {bound:.6g}) for model {model.name!r}, "
                    f"got {self.delta_z}"
                )

    @property
    def label(self) -> str:
        if self.kind == "zarantonello":
            return f"zarantonello(delta={self.delta_z:g})"
        if self.kind == "newton" and self.newton_damping != 1.0:
            return f"newton(delta={self.newton_damping:g})"
        return self.kind


@dataclass(frozen=True)
class StepResult:
    u: FeFunction
    energy: float | None = None  # filled when the scheme evaluated it
    damping: float = 1.0
    halvings: int = 0


class LinearizationScheme(ABC):
    def __init__(self, spec: SchemeSpec):
        self.spec = spec

    @abstractmethod
    def assemble(
        self, disc: Discretization, coefficients: np.ndarray
    ) -> tuple[SparseMatrix, np.ndarray]:
        """System ``(A, b)`` whose solution is the next iterate."""
        ...

    def step(
        self,
        disc: Discretization,
        u: FeFunction,
        rel_tol: float = DEFAULT_REL_TOL,
    ) -> StepResult:
        matrix, rhs = self.assemble(disc, u.coefficients)
        coefficients = solve_spd(matrix, rhs, rel_tol, x0=u.coefficients)
        return StepResult(u=u.with_coefficients(coefficients))
