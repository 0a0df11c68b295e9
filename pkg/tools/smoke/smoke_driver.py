"""Smoke-check for the adaptive loop, its history and telemetry storage."""

import math
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))


def _assert_equal(actual, expected, label: str) -> None:
    if actual != expected:
        raise AssertionError(f"{label}: expected {expected}, got {actual}")


def _assert_close(actual: float, expected: float, label: str, tol: float = 1e-12) -> None:
    if not math.isclose(actual, expected, rel_tol=tol, abs_tol=tol):
        raise AssertionError(f"{label}: expected {expected!r}, got {actual!r}")


def _assert_raises(exc_type: type[BaseException], fn, label: str) -> None:
    try:
        fn()
    except exc_type:
        return
    raise AssertionError(f"{label}: expected {exc_type.__name__}")


@dataclass
class _Recorder:
    rows: list = field(default_factory=list)
    meshes: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def on_row(self, row) -> None:
        self.rows.append(row)

    def on_mesh(self, summary) -> None:
        self.meshes.append(summary)

    def on_event(self, message: str, style: str = "") -> None:
        self.events.append(message)


def _config(kind: str = "kacanov", *, lambda_: float = 0.1, max_elements: int = 1500, **extra):
    from ailfem.config import AdaptiveConfig
    from ailfem.schemes import SchemeSpec

    return AdaptiveConfig(
        theta=0.5, lambda_=lambda_, scheme=SchemeSpec(kind), max_elements=max_elements, **extra
    )


def _check_history_invariants(history, lambda_: float, max_elements: int, label: str) -> None:
    rows = history.rows
    _assert_equal([row.step for row in rows], list(range(len(rows))), f"{label}: step counter")
    _assert_equal((rows[0].N, rows[0].n), (0, 0), f"{label}: first row")
    cumulative = 0
    for row in rows:
        cumulative += row.elems
        _assert_equal(row.cum_elems, cumulative, f"{label}: cumulative elements")
        _assert_close(row.quasi_error, row.error + row.eta, f"{label}: quasi-error")
    times = [row.dt_s for row in rows]
    if any(later < earlier for earlier, later in zip(times, times[1:])):
        raise AssertionError(f"{label}: cumulative time decreased")

    for N in history.meshes():
        mesh_rows = history.rows_for(N)
        _assert_equal([row.n for row in mesh_rows], list(range(len(mesh_rows))), f"{label}: n")
        if len(mesh_rows) < 2:
            raise AssertionError(f"{label}: mesh {N} ran no inner step")
        # stopping test met exactly at the last step
        for row in mesh_rows[1:]:
            met = math.sqrt(max(row.energy_drop, 0.0)) <= lambda_ * row.eta
            if met != (row is mesh_rows[-1]):
                raise AssertionError(f"{label}: stopping test inconsistent on mesh {N}")
        if N < history.meshes()[-1] and mesh_rows[-1].elems > max_elements:
            raise AssertionError(f"{label}: mesh {N} exceeded the budget before the last")
    _assert_equal(history.stop_reason, "element budget", f"{label}: stop reason")
    if rows[-1].elems <= max_elements:
        raise AssertionError(f"{label}: last mesh does not exceed the element budget")


def _check_runs() -> None:
    from ailfem.engine import AdaptiveRunError, run_ailfem
    from ailfem.metrics.rates import effectivity_range
    from ailfem.model import linear_model, lshape_solution

    solution = lshape_solution()
    for kind in ("zarantonello", "kacanov", "newton"):
        recorder = _Recorder()
        history = run_ailfem(_config(kind), solution, observers=[recorder])
        _check_history_invariants(history, 0.1, 1500, kind)
        _assert_equal(len(recorder.rows), len(history), f"{kind}: observed rows")
        _assert_equal(len(recorder.meshes), len(history.meshes()), f"{kind}: mesh records")
        if not recorder.events:
            raise AssertionError(f"{kind}: no events reported")
        low, high = effectivity_range(history)
        if not (0.01 <= low and high <= 10.0):
            raise AssertionError(f"{kind}: effectivity range [{low}, {high}]")
        if kind != "newton":
            for row in history:
                if row.n >= 1 and not row.energy_drop >= -1e-12 * max(1.0, abs(row.energy)):
                    raise AssertionError(f"{kind}: energy increased at step {row.step}")

    first = run_ailfem(_config("kacanov"), solution)
    second = run_ailfem(_config("kacanov"), solution)
    for a, b in zip(first, second, strict=True):
        if a.csv_fields()[:-2] != b.csv_fields()[:-2] or a.cum_elems != b.cum_elems:
            raise AssertionError(f"runs differ at step {a.step}")

    relaxed = run_ailfem(_config("zarantonello", lambda_=1e6, max_elements=800), solution)
    if any(relaxed.inner_steps(N) != 1 for N in relaxed.meshes()):
        raise AssertionError("lambda = 1e6 must stop after one inner step per mesh")

    linear = lshape_solution(linear_model())
    history = run_ailfem(_config("kacanov", max_elements=800), linear)
    for N in history.meshes():
        rows = history.rows_for(N)
        if len(rows) > 3:
            raise AssertionError(f"linear problem needed {len(rows) - 1} steps on mesh {N}")
        if len(rows) == 3 and abs(rows[2].energy_drop) > 1e-10:
            raise AssertionError("second Kacanov step on a linear problem must not move")

    capped = _config("zarantonello", lambda_=1e-9, max_inner_iterations=2)
    try:
        run_ailfem(capped, solution)
    except AdaptiveRunError as exc:
        _assert_equal(exc.reason, "inner-loop cap", "abort reason")
        _assert_equal(exc.history.stop_reason, "inner-loop cap", "history stop reason")
        _assert_equal(len(exc.history), 3, "rows before the abort")
    else:
        raise AssertionError("inner-loop cap must abort the run")

    _assert_raises(
        ValueError, lambda: run_ailfem(_config(max_elements=100), solution), "budget below mesh"
    )


def _check_quasi_error_decay() -> None:
    from ailfem.engine import run_ailfem
    from ailfem.model import lshape_solution

    history = run_ailfem(_config("kacanov", max_elements=3000), lshape_solution())
    steps = np.array([row.step for row in history], dtype=np.float64)
    quasi = np.array([row.quasi_error for row in history])
    if len(quasi) <= 20 or not np.all(np.isfinite(quasi) & (quasi > 0.0)):
        raise AssertionError(f"need a finite quasi-error on more than 20 steps, got {len(quasi)}")

    slope, _ = np.polyfit(steps, np.log(quasi), 1)
    if not slope < 0.0:
        raise AssertionError(f"log quasi-error grows with the step counter: slope {slope:.4f}")

    window = 10
    ratios = quasi[window:] / quasi[:-window]
    share = float(np.mean(ratios < 1.0))
    if share < 0.9:
        raise AssertionError(f"quasi-error fell over {window} steps on only {share:.0%} of them")


def _check_history_helpers() -> None:
    from ailfem.history import (
        HistoryRow,
        RunHistory,
        contraction_factor,
        f4_quotient,
        kappa_value,
        read_history_csv,
    )

    def row(step: int, n: int, energy: float, kappa: float = math.nan) -> HistoryRow:
        drop = math.nan if n == 0 else 0.0
        return HistoryRow(
            N=0,
            n=n,
            step=step,
            elems=192,
            dofs=81,
            eta=0.5,
            energy=energy,
            energy_drop=drop,
            error=0.1,
            quasi_error=0.6,
            kappa=kappa,
            dt_s=0.01 * step,
            cum_elems=192 * (step + 1),
        )

    history = RunHistory()
    history.append(row(0, 0, 1.0))
    history.append(row(1, 1, 0.5))
    history.append(row(2, 2, 0.1, kappa=0.75))
    _assert_close(contraction_factor(history, 0, 0.0), 0.1, "contraction factor")
    _assert_close(f4_quotient(history, 0), 0.75, "f4 quotient")
    _assert_raises(ValueError, lambda: contraction_factor(history, 0, 0.2), "reference too high")
    _assert_raises(ValueError, lambda: contraction_factor(history, 0, math.nan), "nan reference")
    _assert_raises(ValueError, lambda: history.append(row(2, 3, 0.1)), "repeated step")

    flat = RunHistory()
    flat.append(row(0, 0, 0.3))
    flat.append(row(1, 1, 0.3))
    _assert_close(contraction_factor(flat, 0, -1.0), 1.0, "no energy change")
    if f4_quotient(flat, 0) is not None:
        raise AssertionError("identical iterates must give an undefined quotient")
    if not math.isnan(kappa_value(0.0, 0.0)):
        raise AssertionError("kappa of identical iterates must be nan")

    with tempfile.TemporaryDirectory() as temp_dir:
        path = history.write_csv(Path(temp_dir) / "history.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0]
        _assert_equal(
            header,
            "N,n,step,elems,dofs,eta,energy,energy_drop,error,quasi_error,kappa,dt_s,cum_elems",
            "CSV header",
        )
        loaded = read_history_csv(path)
        _assert_equal(
            [r.csv_fields() for r in loaded], [r.csv_fields() for r in history], "CSV rows"
        )


def _check_rates() -> None:
    from ailfem.metrics.rates import crossover, loglog_slope, ordering_share, tail_slope

    x = np.logspace(2, 5, 25)
    _assert_close(loglog_slope(x, 3.0 * x**-0.5), -0.5, "slope of x^-1/2")
    y = np.where(x < 1e3, 5.0 * x**-0.2, 5.0 * 1e3**0.3 * x**-0.5)
    _assert_close(tail_slope(x, y), -0.5, "tail slope", tol=1e-9)
    start = crossover(x, y)
    if start is None or not 4e2 <= start <= 2e3:
        raise AssertionError(f"crossover {start} not at the kink")
    _assert_raises(ValueError, lambda: loglog_slope([1.0], [1.0]), "single point")
    _assert_close(ordering_share({0: 5, 1: 4}, {0: 3, 1: 4}, {0: 1, 1: 1}), 1.0, "ordering")


def _check_storage() -> None:
    from ailfem.config import ExperimentConfig
    from ailfem.engine import AdaptiveEngine
    from ailfem.metrics.recorder import TelemetryRecorder
    from ailfem.model import lshape_solution
    from ailfem.storage import RunDatabase

    with tempfile.TemporaryDirectory() as temp_dir:
        config = ExperimentConfig(adaptive=_config(max_elements=600), out_dir=Path(temp_dir))
        db = RunDatabase(Path(temp_dir) / "results.db")
        run_id = db.start_run("kacanov", config.manifest().to_json())
        telemetry = TelemetryRecorder(db, run_id)
        engine = AdaptiveEngine(config.adaptive, lshape_solution(), observers=[telemetry])
        history = engine.run()
        telemetry.finalize(history.stop_reason)

        stored = db.get_history(run_id)
        _assert_equal(len(stored), len(history), "stored rows")
        _assert_equal(telemetry.rows_written, len(history), "recorded rows")
        _assert_equal(db.get_mesh_count(run_id), len(history.meshes()), "stored meshes")
        _assert_equal(stored[-1].csv_fields(), history.last.csv_fields(), "stored last row")
        if not math.isnan(stored[0].energy_drop):
            raise AssertionError("missing energy drop must come back as nan")

        # failed writes are reported once and never raised
        reports: list[str] = []
        db.close()
        broken = TelemetryRecorder(db, run_id, report=reports.append)
        broken.on_row(history.last)
        broken.on_row(history.last)
        _assert_equal(len(reports), 1, "write failure reports")
        _assert_equal(broken.rows_written, 0, "rows written after close")


def main() -> int:
    _check_history_helpers()
    _check_rates()
    _check_runs()
    _check_quasi_error_decay()
    _check_storage()
    print("smoke_driver: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
