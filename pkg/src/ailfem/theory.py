"""
Contraction constants of the linearization schemes.

For a scheme with coercivity ``alpha``, continuity ``beta`` and energy
compatibility constant ``C_H`` (energy drop >= C_H * |increment|^2) the energy
error contracts per step by

    q_ctr^2 = 1 - 2 C_H nu^2 / (beta^2 L_F)

and the adaptive loop is cost optimal for ``lambda < lambda_opt * theta`` with
``lambda_opt = (1 - q_ctr) / (q_ctr C_stb) * sqrt(nu / 2)``.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any

from ailfem.model.problem import NonlinearModel
from ailfem.schemes.base import SchemeSpec


@dataclass(frozen=True)
class TheoryConstants:
    scheme: str
    nu: float
    L_F: float
    alpha: float
    beta: float
    C_H: float
    q_ctr: float  # 1.0 when no contraction is guaranteed
    lambda_opt: float  # 0.0 when no contraction is guaranteed
    energy_contraction_guaranteed: bool
    norm_contraction_factor: float | None = None
    norm_contraction_guaranteed: bool | None = None

    @property
    def aposteriori_factor(self) -> float:
        """``beta / nu``: bounds ``||u*_Y - u^n||`` by multiples of ``||u^n - u^{n+1}||``."""
        return self.beta / self.nu

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def scheme_constants(
    spec: SchemeSpec, model: NonlinearModel, c_stb: float = 1.0
) -> TheoryConstants:
    spec.validate_for(model)
    if not c_stb > 0.0:
        raise ValueError(f"c_stb must be positive, got {c_stb}")
    nu, L_F = model.nu, model.L_F
    norm_factor: float | None = None
    norm_ok: bool | None = None

    if spec.kind == "zarantonello":
        delta = spec.delta_z
        alpha = beta = 1.0 / delta
        C_H = 1.0 / delta - L_F / 2.0
        norm_factor = 1.0 - delta * (2.0 * nu - delta * L_F * L_F)
        norm_ok = norm_factor < 1.0
    elif spec.kind == "kacanov":
        alpha = model.mu_min
        beta = model.M_mu
        C_H = alpha / 2.0
    else:
        # fixed damping: delta_min = delta_max
        delta = spec.newton_damping
        alpha = model.m_mu / delta
        beta = model.flux_derivative_bound / delta
        C_H = model.m_mu / delta - L_F / 2.0

    guaranteed = C_H > 0.0
    if guaranteed:
        q_ctr = math.sqrt(max(0.0, 1.0 - 2.0 * C_H * nu * nu / (beta * beta * L_F)))
        lambda_opt = (
            (1.0 - q_ctr) / (q_ctr * c_stb) * math.sqrt(nu / 2.0) if q_ctr > 0.0 else math.inf
        )
    else:
        q_ctr, lambda_opt = 1.0, 0.0

    return TheoryConstants(
        scheme=spec.kind,
        nu=nu,
        L_F=L_F,
        alpha=alpha,
        beta=beta,
        C_H=C_H,
        q_ctr=q_ctr,
        lambda_opt=lambda_opt,
        energy_contraction_guaranteed=guaranteed,
        norm_contraction_factor=norm_factor,
        norm_contraction_guaranteed=norm_ok,
    )
