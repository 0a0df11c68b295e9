"""
Discrete minimizers and the exact energy ``E(u*)``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ailfem.estimator.indicators import local_indicators
from ailfem.fem.discrete import Discretization
from ailfem.fem.quadrature import DEGREE5, ScatteredQuadrature, graded_quadrature
from ailfem.fem.space import FeFunction, prolongate
from ailfem.linalg.sparse import DEFAULT_REL_TOL
from ailfem.marking import doerfler
from ailfem.mesh.mesh import Mesh
from ailfem.mesh.refine import refine, uniform_refine
from ailfem.model.manufactured import ManufacturedSolution
from ailfem.schemes import KacanovScheme, SchemeSpec

logger = logging.getLogger(__name__)

MIN_BUDGET = 10_000
ORACLE_MAX_STEPS = 500
ORACLE_STAGNATION = 1e-14


class ReferenceEnergyError(RuntimeError):
    """The two estimates of ``E(u*)`` disagree."""

    def __init__(self, message: str, *, quadrature: float, extrapolated: float):
        super().__init__(message)
        self.quadrature = quadrature
        self.extrapolated = extrapolated


@dataclass(frozen=True)
class ReferenceEnergy:
    value: float
    quadrature: float
    extrapolated: float | None
    quadrature_elements: int
    fitted_meshes: tuple[int, ...] = ()

    @property
    def discrepancy(self) -> float | None:
        if self.extrapolated is None:
            return None
        return abs(self.quadrature - self.extrapolated)


def discrete_solution(
    disc: Discretization,
    initial: FeFunction | None = None,
    *,
    max_steps: int = ORACLE_MAX_STEPS,
    stagnation: float = ORACLE_STAGNATION,
    rel_tol: float = DEFAULT_REL_TOL,
) -> FeFunction:
    """Kacanov iteration until the energy stagnates or ``max_steps`` steps."""
    scheme = KacanovScheme(SchemeSpec("kacanov"))
    u = disc.zero() if initial is None else initial
    current = disc.energy(u.coefficients)
    for step in range(1, max_steps + 1):
        u = scheme.step(disc, u, rel_tol).u
        following = disc.energy(u.coefficients)
        change = abs(current - following)
        current = following
        if change < stagnation * max(1.0, abs(current)):
            logger.debug("oracle: stagnation after %d steps, energy %.17g", step, current)
            break
    return u


def quadrature_energy(
    solution: ManufacturedSolution, mesh: Mesh, *, depth: int = 24
) -> float:
    """``int psi(|grad u*|^2) - g u*`` on ``mesh``, graded towards the singular point."""
    if solution.singular_point is None:
        points = DEGREE5.points(mesh.corners).reshape(-1, 2)
        weights = (mesh.areas[:, None] * DEGREE5.weights[None, :]).ravel()
        quadrature = ScatteredQuadrature(
            points, weights, np.repeat(np.arange(mesh.n_elements), DEGREE5.n_points)
        )
    else:
        quadrature = graded_quadrature(mesh, solution.singular_point, depth=depth)
    gradient = solution.gradient(quadrature.points)
    s = np.sum(gradient * gradient, axis=1)
    integrand = solution.model.psi(s) - solution.load(quadrature.points) * solution.value(
        quadrature.points
    )
    return float(np.sum(quadrature.weights * integrand))


def extrapolated_energy(
    solution: ManufacturedSolution,
    initial_mesh: Mesh,
    budget_elements: int,
    *,
    theta: float = 0.5,
    fit_points: int = 4,
) -> tuple[float, tuple[int, ...]]:
    """Fit ``E(u_N) = E* + c / #T_N`` over the last adaptive meshes."""
    mesh = initial_mesh
    u: FeFunction | None = None
    sizes: list[int] = []
    energies: list[float] = []
    while True:
        disc = Discretization.from_solution(mesh, solution)
        start = None if u is None else prolongate(u, mesh, disc.dofmap)
        u = discrete_solution(disc, start)
        sizes.append(mesh.n_elements)
        energies.append(disc.energy(u.coefficients))
        if mesh.n_elements >= budget_elements:
            break
        marked = doerfler(local_indicators(disc, u), theta)
        if not len(marked):
            break
        mesh = refine(mesh, marked)

    count = min(fit_points, len(sizes))
    if count < 2:
        return energies[-1], tuple(sizes)
    inverse = 1.0 / np.asarray(sizes[-count:], dtype=np.float64)
    slope, intercept = np.polyfit(inverse, np.asarray(energies[-count:]), 1)
    logger.debug("extrapolation: slope %.6g over meshes %s", slope, sizes[-count:])
    return float(intercept), tuple(sizes[-count:])


def reference_energy(
    solution: ManufacturedSolution,
    initial_mesh: Mesh,
    budget_elements: int = MIN_BUDGET,
    *,
    cross_check: bool = True,
    rtol: float = 1e-4,
) -> ReferenceEnergy:
    """Estimate ``E(u*)`` by quadrature, cross-checked by extrapolated discrete energies."""
    if budget_elements < MIN_BUDGET:
        raise ValueError(f"budget_elements must be >= {MIN_BUDGET}, got {budget_elements}")

    mesh = initial_mesh
    while mesh.n_elements < budget_elements:
        mesh = uniform_refine(mesh)
    quadrature = quadrature_energy(solution, mesh)
    logger.info(
        "reference energy by quadrature on %d elements: %.12g", mesh.n_elements, quadrature
    )
    if not cross_check:
        return ReferenceEnergy(quadrature, quadrature, None, mesh.n_elements)

    extrapolated, fitted = extrapolated_energy(solution, initial_mesh, budget_elements)
    logger.info("reference energy by extrapolation: %.12g", extrapolated)
    if abs(quadrature - extrapolated) > rtol * abs(quadrature):
        raise ReferenceEnergyError(
            f"reference energies disagree: quadrature {quadrature:.12g}, "
            f"extrapolation {extrapolated:.12g}",
            quadrature=quadrature,
            extrapolated=extrapolated,
        )
    return ReferenceEnergy(quadrature, quadrature, extrapolated, mesh.n_elements, fitted)
