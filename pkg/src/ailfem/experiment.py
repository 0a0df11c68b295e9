"""
One adaptive experiment with its output directory.

The output directory receives ``history.csv``, ``manifest.json``,
``summary.txt``, ``results.db``, the SVG figures and optionally
``mesh_final.txt``. Outputs are written on failure too.
"""

import logging
import time
from pathlib import Path

from ailfem.config import ExperimentConfig, build_problem
from ailfem.engine import AdaptiveEngine, AdaptiveRunError
from ailfem.history import RunHistory
from ailfem.logger import AilfemLogger
from ailfem.mesh.io import dump_mesh
from ailfem.metrics.graphs import (
    create_contraction_graph,
    create_iterations_graph,
    create_kappa_graph,
    create_rate_elems_graph,
    create_rate_time_graph,
)
from ailfem.metrics.recorder import TelemetryRecorder
from ailfem.metrics.report import generate_run_summary
from ailfem.reference import ReferenceEnergy, reference_energy
from ailfem.storage.database import RunDatabase
from ailfem.theory import TheoryConstants, scheme_constants

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.csv"
MANIFEST_FILE = "manifest.json"


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.run_dir: Path = config.out_dir
        self.run_dir.mkdir(parents=True, exist_ok=True)

        self.solution, self.initial_mesh = build_problem(config.problem, config.model)
        self.manifest = config.manifest()
        self.db = RunDatabase(self.run_dir / "results.db")
        self.logger = AilfemLogger(self.run_dir, config)
        self.constants: TheoryConstants = scheme_constants(
            config.scheme, self.solution.model
        )
        self.reference: ReferenceEnergy | None = None
        self.engine: AdaptiveEngine | None = None

    def stop(self) -> None:
        self.db.close()

    def __enter__(self) -> "ExperimentRunner":
        return self

    def __exit__(self, *args) -> None:
        self.stop()

    # ------------------------------------------------------------------
    # Run-end artefacts, all best effort
    # ------------------------------------------------------------------

    def _warn(self, message: str) -> None:
        logger.warning(message)
        self.logger.log_stop_reason(message)

    def _write_history(self, history: RunHistory) -> None:
        try:
            history.write_csv(self.run_dir / HISTORY_FILE)
        except BaseException as exc:
            self._warn(f"warning: failed to write {HISTORY_FILE}: {exc!r}")

    def _compute_reference(self, history: RunHistory) -> None:
        budget = self.config.reference_budget
        if not budget or not len(history):
            return
        try:
            self.reference = reference_energy(
                self.solution,
                self.initial_mesh,
                budget,
                cross_check=self.config.reference_check,
            )
        except BaseException as exc:
            self._warn(f"warning: failed to compute reference energy: {exc!r}")

    def _generate_run_end_graphs(self, history: RunHistory) -> None:
        """Render the SVG figures, warning on failures."""
        label = self.config.scheme.label
        histories = {label: history}
        references = {} if self.reference is None else {label: self.reference.value}
        bounds = (
            {label: self.constants.C_H}
            if self.constants.energy_contraction_guaranteed
            else {}
        )
        graph_jobs = (
            ("rate_elems", lambda: create_rate_elems_graph(histories, self.run_dir)),
            ("rate_time", lambda: create_rate_time_graph(histories, self.run_dir)),
            (
                "contraction",
                lambda: create_contraction_graph(histories, references, self.run_dir),
            ),
            ("iterations", lambda: create_iterations_graph(histories, self.run_dir)),
            ("kappa", lambda: create_kappa_graph(histories, self.run_dir, bounds)),
        )
        for graph_name, graph_fn in graph_jobs:
            try:
                graph_fn()
            except BaseException as exc:
                self._warn(f"warning: failed to generate {graph_name} graph: {exc!r}")

    def _generate_run_end_report(self, history: RunHistory, elapsed: float) -> None:
        try:
            generate_run_summary(
                run_dir=self.run_dir,
                history=history,
                config=self.config,
                constants=self.constants,
                reference=self.reference,
                elapsed=elapsed,
            )
        except BaseException as exc:
            self._warn(f"warning: failed to write summary: {exc!r}")

    def _dump_final_mesh(self) -> None:
        if not self.config.mesh_dump or self.engine is None:
            return
        try:
            dump_mesh(self.engine.mesh, self.run_dir / "mesh_final.txt")
        except BaseException as exc:
            self._warn(f"warning: failed to dump mesh: {exc!r}")

    # ------------------------------------------------------------------
    # Main entry point
    # ------------------------------------------------------------------

    def run(self) -> RunHistory:
        self.manifest.write(self.run_dir / MANIFEST_FILE)
        run_id = self.db.start_run(self.config.scheme.kind, self.manifest.to_json())
        telemetry = TelemetryRecorder(self.db, run_id, report=self._warn)
        self.engine = AdaptiveEngine(
            self.config.adaptive,
            self.solution,
            self.initial_mesh,
            observers=[self.logger, telemetry],
        )
        history = self.engine.history
        start_time = time.monotonic()

        with self.logger:
            self.logger.start()

            run_error: BaseException | None = None
            try:
                self.engine.run()
            except KeyboardInterrupt:
                history.stop_reason = "interrupted by user"
                self.logger.log_stop_reason("interrupted by user")
            except BaseException as exc:
                run_error = exc

            finally:
                telemetry.finalize(history.stop_reason)
                self._write_history(history)
                self._compute_reference(history)
                if self.config.plots:
                    self._generate_run_end_graphs(history)
                self._generate_run_end_report(history, time.monotonic() - start_time)
                self._dump_final_mesh()

                try:
                    self.stop()
                except BaseException as stop_exc:
                    if run_error is None:
                        raise
                    run_error.add_note(f"experiment cleanup also failed: {stop_exc!r}")

            if run_error is not None:
                raise run_error

        self.logger.print_summary(history, time.monotonic() - start_time)
        return history


def run_experiment(config: ExperimentConfig) -> int:
    """Run one experiment; 0 on success, 1 when the run was aborted."""
    try:
        ExperimentRunner(config).run()
    except AdaptiveRunError as exc:
        logger.error("run aborted (%s): %s", exc.reason, exc)
        logger.error("partial outputs in %s", config.out_dir)
        return 1
    return 0
