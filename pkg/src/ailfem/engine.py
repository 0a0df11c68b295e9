"""
Adaptive iteratively linearized FEM loop.

Outer loop over meshes ``N``: iterate the linearization until the energy
drop satisfies ``sqrt(E(u^{n-1}) - E(u^n)) <= lambda * eta_N(u^n)``, mark
with Doerfler, refine and prolongate the final iterate as the next initial
guess. Every visited ``(N, n)`` produces one :class:`HistoryRow`.
"""

import logging
import math
import time
from collections.abc import Iterable

from ailfem.config import AdaptiveConfig
from ailfem.contracts import RunObserver, SupportsEvents, SupportsMeshRecord
from ailfem.estimator.indicators import IndicatorField, local_indicators, total
from ailfem.fem.discrete import Discretization
from ailfem.fem.space import FeFunction, prolongate
from ailfem.history import HistoryRow, RunHistory, kappa_value
from ailfem.linalg.sparse import SolverError
from ailfem.marking import doerfler
from ailfem.mesh.generators import make_lshape_initial
from ailfem.mesh.mesh import Mesh
from ailfem.mesh.refine import refine
from ailfem.model.manufactured import ManufacturedSolution
from ailfem.schemes import StepFailure, build_scheme

logger = logging.getLogger(__name__)


class AdaptiveRunError(RuntimeError):
    """The adaptive run was aborted; ``history`` holds the rows recorded so far."""

    def __init__(self, message: str, *, history: RunHistory, reason: str):
        super().__init__(message)
        self.history = history
        self.reason = reason


class AdaptiveEngine:
    def __init__(
        self,
        config: AdaptiveConfig,
        solution: ManufacturedSolution,
        initial_mesh: Mesh | None = None,
        observers: Iterable[RunObserver] = (),
    ):
        self.config = config
        self.solution = solution
        self.initial_mesh = make_lshape_initial() if initial_mesh is None else initial_mesh
        config.scheme.validate_for(solution.model)
        config.check_initial_mesh(self.initial_mesh)
        self.scheme = build_scheme(config.scheme)
        self.observers = list(observers)
        self.history = RunHistory()

        # State of the last visited mesh
        self.mesh = self.initial_mesh
        self.solution_iterate: FeFunction | None = None
        self.indicators: IndicatorField | None = None

        self._step = 0
        self._cum_elems = 0
        self._elapsed = 0.0

    # ------------------------------------------------------------------
    # Observers
    # ------------------------------------------------------------------

    def _record(self, row: HistoryRow) -> None:
        self.history.append(row)
        for observer in self.observers:
            observer.on_row(row)

    def _event(self, message: str, style: str = "") -> None:
        logger.debug(message)
        for observer in self.observers:
            if isinstance(observer, SupportsEvents):
                observer.on_event(message, style)

    def _mesh_done(self, N: int) -> None:
        summary = self.history.mesh_summary(N)
        for observer in self.observers:
            if isinstance(observer, SupportsMeshRecord):
                observer.on_mesh(summary)

    def _abort(self, reason: str, message: str) -> AdaptiveRunError:
        self.history.stop_reason = reason
        self._event(f"Stopped: {reason}", "bold red")
        return AdaptiveRunError(message, history=self.history, reason=reason)

    # ------------------------------------------------------------------
    # Main loop
    # ------------------------------------------------------------------

    def run(self) -> RunHistory:
        config = self.config
        lambda_ = config.lambda_
        mesh = self.initial_mesh
        u: FeFunction | None = None
        N = 0

        while True:
            started = time.monotonic()
            disc = Discretization.from_solution(mesh, self.solution)
            u = disc.zero() if u is None else prolongate(u, mesh, disc.dofmap)
            energy = disc.energy(u.coefficients)
            field = local_indicators(disc, u)
            eta = total(field)
            self._elapsed += time.monotonic() - started
            self._emit(N, 0, disc, u, eta, energy)

            n = 0
            while True:
                if n >= config.max_inner_iterations:
                    raise self._abort(
                        "inner-loop cap",
                        f"stopping test not met after {n} steps on mesh {N} "
                        f"({mesh.n_elements} elements)",
                    )
                started = time.monotonic()
                try:
                    result = self.scheme.step(disc, u, config.solver_rel_tol)
                except SolverError as exc:
                    raise self._abort(
                        "solver failure", f"mesh {N}, step {n + 1}: {exc}"
                    ) from exc
                except StepFailure as exc:
                    raise self._abort(
                        "step failure", f"mesh {N}, step {n + 1}: {exc}"
                    ) from exc
                following = result.u
                new_energy = (
                    disc.energy(following.coefficients)
                    if result.energy is None
                    else result.energy
                )
                drop = energy - new_energy
                increment = disc.x_norm(following.coefficients - u.coefficients)
                field = local_indicators(disc, following)
                eta = total(field)
                self._elapsed += time.monotonic() - started

                n += 1
                u, energy = following, new_energy
                self._emit(
                    N,
                    n,
                    disc,
                    u,
                    eta,
                    energy,
                    drop=drop,
                    increment=increment,
                    damping=result.damping,
                    halvings=result.halvings,
                )
                if result.halvings:
                    self._event(
                        f"Damping halved {result.halvings}x to {result.damping:g}", "yellow"
                    )
                if math.sqrt(max(drop, 0.0)) <= lambda_ * eta:
                    break

            self.mesh, self.solution_iterate, self.indicators = mesh, u, field
            self._event(f"Mesh {N}: stopping test met after {n} steps", "green")

            if eta == 0.0:
                self.history.stop_reason = "exact solution"
                self._mesh_done(N)
                break
            if mesh.n_elements > config.max_elements:
                self.history.stop_reason = "element budget"
                self._mesh_done(N)
                break

            started = time.monotonic()
            marked = doerfler(field, config.theta)
            fine = refine(mesh, marked)
            self._elapsed += time.monotonic() - started

            self.history.marked[N] = len(marked)
            self._mesh_done(N)
            self._event(
                f"Refined mesh {N}: {len(marked)} marked, "
                f"{mesh.n_elements} -> {fine.n_elements} elements",
                "cyan",
            )
            mesh = fine
            N += 1

        self._event(f"Stopped: {self.history.stop_reason}", "bold green")
        logger.info(
            "run finished after %d meshes and %d steps: %s",
            N + 1,
            self._step,
            self.history.stop_reason,
        )
        return self.history

    def _emit(
        self,
        N: int,
        n: int,
        disc: Discretization,
        u: FeFunction,
        eta: float,
        energy: float,
        *,
        drop: float = math.nan,
        increment: float = math.nan,
        damping: float = math.nan,
        halvings: int = 0,
    ) -> None:
        # error evaluation is not part of the timed work
        error = disc.h1_error(u.coefficients)
        elems = int(disc.mesh.n_elements)
        self._cum_elems += elems
        row = HistoryRow(
            N=N,
            n=n,
            step=self._step,
            elems=elems,
            dofs=int(disc.n_dofs),
            eta=float(eta),
            energy=float(energy),
            energy_drop=float(drop),
            error=error,
            quasi_error=error + float(eta),
            kappa=kappa_value(float(drop), float(increment)),
            dt_s=self._elapsed,
            cum_elems=self._cum_elems,
            increment=float(increment),
            damping=float(damping),
            halvings=int(halvings),
        )
        self._step += 1
        self._record(row)


def run_ailfem(
    config: AdaptiveConfig,
    solution: ManufacturedSolution,
    initial_mesh: Mesh | None = None,
    observers: Iterable[RunObserver] = (),
) -> RunHistory:
    """Run the adaptive loop; raises :class:`AdaptiveRunError` on abort."""
    return AdaptiveEngine(config, solution, initial_mesh, observers).run()

