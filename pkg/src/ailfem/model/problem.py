"""
Quasi-linear diffusion models ``-div(mu(|grad u|^2) grad u) = g``.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

ScalarMap = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    """Evaluation outside the set where a function is defined."""


@dataclass(frozen=True)
class NonlinearModel:
    """Diffusion coefficient ``mu`` with its potential and monotonicity constants.

    ``psi(s) = 1/2 * int_0^s mu(t) dt``. ``m_mu`` and ``M_mu`` bound the
    difference quotient of ``t -> mu(t^2) t``; ``mu_min`` and ``mu_max`` bound
    ``mu`` itself and ``flux_derivative_bound`` bounds ``mu(t) + |2 t mu'(t)|``.
    """

    name: str
    mu: ScalarMap
    mu_prime: ScalarMap
    psi: ScalarMap
    m_mu: float
    M_mu: float
    mu_min: float
    mu_max: float
    flux_derivative_bound: float

    def __post_init__(self) -> None:
        if not 0.0 < self.m_mu <= self.M_mu:
            raise ValueError(
                f"monotonicity constants must satisfy 0 < m_mu <= M_mu, "
                f"got {self.m_mu} and {self.M_mu}"
            )
        if not 0.0 < self.mu_min <= self.mu_max:
            raise ValueError(
                f"mu bounds must satisfy 0 < mu_min <= mu_max, "
                f"got {self.mu_min} and {self.mu_max}"
            )

    @property
    def nu(self) -> float:
        return self.m_mu

    @property
    def L_F(self) -> float:
        return 3.0 * self.M_mu

    def flux(self, gradients: np.ndarray) -> np.ndarray:
        """``mu(|g|^2) g`` for gradients of shape (..., 2)."""
        s = np.sum(gradients * gradients, axis=-1)
        return self.mu(s)[..., None] * gradients


def _exp_mu(t: np.ndarray) -> np.ndarray:
    return 1.0 + np.exp(-np.asarray(t, dtype=np.float64))


def _exp_mu_prime(t: np.ndarray) -> np.ndarray:
    return -np.exp(-np.asarray(t, dtype=np.float64))


def _exp_psi(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    return 0.5 * (s - np.expm1(-s))


def _unit_mu(t: np.ndarray) -> np.ndarray:
    return np.ones_like(np.asarray(t, dtype=np.float64))


def _unit_mu_prime(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(t, dtype=np.float64))


def _unit_psi(s: np.ndarray) -> np.ndarray:
    return 0.5 * np.asarray(s, dtype=np.float64)


def default_model() -> NonlinearModel:
    """``mu(t) = 1 + exp(-t)``."""
    return NonlinearModel(
        name="exp",
        mu=_exp_mu,
        mu_prime=_exp_mu_prime,
        psi=_exp_psi,
        m_mu=1.0 - 2.0 * math.exp(-1.5),
        M_mu=2.0,
        mu_min=1.0,
        mu_max=2.0,
        # sup_t 2 t exp(-t) = 2 / e at t = 1
        flux_derivative_bound=2.0 + 2.0 / math.e,
    )


def linear_model() -> NonlinearModel:
    """``mu = 1``: the Poisson problem."""
    return NonlinearModel(
        name="linear",
        mu=_unit_mu,
        mu_prime=_unit_mu_prime,
        psi=_unit_psi,
        m_mu=1.0,
        M_mu=1.0,
        mu_min=1.0,
        mu_max=1.0,
        flux_derivative_bound=1.0,
    )


MODELS: dict[str, Callable[[], NonlinearModel]] = {
    "exp": default_model,
    "linear": linear_model,
}


def model_by_name(name: str) -> NonlinearModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(
            f"Unknown model {name!r}. Available: {', '.join(sorted(MODELS))}"
        ) from None
