"""
Damped Newton iteration with energy-based damping control.

The Newton matrix and the residual do not depend on the damping, so the
direction ``d = F'(u)^{-1} r(u)`` is computed once and the trial iterates
``u - delta * d`` only rescale it.
"""

import logging

import numpy as np

from ailfem.fem.discrete import Discretization
from ailfem.fem.space import FeFunction
from ailfem.linalg.sparse import DEFAULT_REL_TOL, SparseMatrix, solve_spd
from ailfem.schemes.base import LinearizationScheme, StepFailure, StepResult

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30
ENERGY_SLACK = 1e-12


class NewtonScheme(LinearizationScheme):
    def jacobian(self, disc: Discretization, coefficients: np.ndarray) -> SparseMatrix:
        grads = disc.gradients(coefficients)
        s = np.sum(grads * grads, axis=1)
        return disc.assemble(disc.model.mu(s), 2.0 * disc.model.mu_prime(s), grads)

    def assemble(
        self, disc: Discretization, coefficients: np.ndarray
    ) -> tuple[SparseMatrix, np.ndarray]:
        matrix = self.jacobian(disc, coefficients)
        rhs = matrix @ coefficients - self.spec.newton_damping * disc.residual(coefficients)
        return matrix, rhs

    def step(
        self,
        disc: Discretization,
        u: FeFunction,
        rel_tol: float = DEFAULT_REL_TOL,
    ) -> StepResult:
        coefficients = u.coefficients
        direction = solve_spd(
            self.jacobian(disc, coefficients), disc.residual(coefficients), rel_tol
        )
        damping = self.spec.newton_damping
        if not self.spec.newton_correction:
            return StepResult(
                u=u.with_coefficients(coefficients - damping * direction), damping=damping
            )

        start = disc.energy(coefficients)
        slack = ENERGY_SLACK * max(1.0, abs(start))
        for halvings in range(MAX_HALVINGS + 1):
            trial = coefficients - damping * direction
            trial_energy = disc.energy(trial)
            if start - trial_energy >= -slack:
                if halvings:
                    logger.debug(
                        "newton: accepted damping %.3g after %d halvings", damping, halvings
                    )
                return StepResult(
                    u=u.with_coefficients(trial),
                    energy=trial_energy,
                    damping=damping,
                    halvings=halvings,
                )
            damping *= 0.5

        raise StepFailure(
            f"energy did not decrease for damping down to {2.0 * damping:.3e} "
            f"(energy {start:.17g})",
            damping=2.0 * damping,
            halvings=MAX_HALVINGS,
        )
