"""Scheme comparison launcher.

Runs one worker process per linearization scheme with shared parameters,
each a normal ``python -m ailfem`` invocation writing into its own
subdirectory, then merges the histories into ``merged.csv``, overlay
figures and ``compare_summary.txt``.
"""

import csv
import json
import os
import signal
import subprocess
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import BinaryIO

from rich.console import Console
from rich.live import Live
from rich.panel import Panel
from rich.table import Table

from ailfem.config import ExperimentConfig, build_problem
from ailfem.history import CSV_COLUMNS, RunHistory, read_history_csv
from ailfem.logger import STATUS_FILE_ENV
from ailfem.metrics.graphs import (
    create_contraction_graph,
    create_iterations_graph,
    create_kappa_graph,
    create_rate_elems_graph,
    create_rate_time_graph,
)
from ailfem.metrics.report import generate_compare_summary
from ailfem.reference import reference_energy
from ailfem.schemes.base import SCHEME_KINDS

THREADS_ENV = "AILFEM_THREADS"
DEFAULT_THREADS = 3


@dataclass
class WorkerHandle:
    scheme: str
    run_dir: Path
    log_path: Path
    status_path: Path
    proc: subprocess.Popen[bytes] | None = None
    log_file: BinaryIO | None = None


def thread_limit() -> int:
    """Concurrent workers allowed by ``AILFEM_THREADS`` (at least 1)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_THREADS
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


def compare_schemes(
    config: ExperimentConfig, schemes: tuple[str, ...] = SCHEME_KINDS
) -> int:
    """Run ``schemes`` with the parameters of ``config``.

    Returns a process-style exit code: 0 if every worker succeeded, 1 otherwise.
    Outputs of successful workers are merged in either case.
    """
    if not schemes:
        raise ValueError("schemes must not be empty")
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    limit = thread_limit()
    console = Console()

    handles = [
        WorkerHandle(
            scheme=scheme,
            run_dir=out_dir / scheme,
            log_path=out_dir / f"{scheme}.log",
            status_path=out_dir / f"{scheme}.status.json",
        )
        for scheme in schemes
    ]

    start_time = time.monotonic()
    interrupted = False
    try:
        with Live(
            _render_dashboard(handles, out_dir, start_time),
            console=console,
            refresh_per_second=4,
        ) as live:
            while True:
                running = sum(1 for h in handles if h.proc is not None and h.proc.poll() is None)
                for handle in handles:
                    if running >= limit:
                        break
                    if handle.proc is None:
                        _launch(handle, config)
                        running += 1
                live.update(_render_dashboard(handles, out_dir, start_time))
                if all(h.proc is not None and h.proc.poll() is not None for h in handles):
                    break
                time.sleep(0.25)
    except KeyboardInterrupt:
        interrupted = True
        print("\n[compare] Ctrl+C received, stopping workers...", file=sys.stderr)
        _graceful_stop_workers(handles)

    failures: dict[str, str] = {}
    for handle in handles:
        if handle.proc is None:
            failures[handle.scheme] = "not started"
            continue
        exit_code = handle.proc.wait()
        if handle.log_file is not None:
            handle.log_file.close()
        if exit_code != 0 and not interrupted:
            failures[handle.scheme] = f"exit code {exit_code} (log: {handle.log_path.name})"
            print(
                f"[compare] scheme={handle.scheme} exited with {exit_code} "
                f"(log: {handle.log_path})",
                file=sys.stderr,
            )

    histories = _load_histories(handles, failures)
    if histories:
        merge_histories(histories, out_dir / "merged.csv")
        if config.plots:
            _overlay_graphs(config, histories, out_dir)
        generate_compare_summary(out_dir=out_dir, histories=histories, failures=failures)

    if interrupted:
        print(f"[compare] stopped by user (outputs: {out_dir})")
        return 0
    if failures:
        print(f"[compare] output dir: {out_dir}", file=sys.stderr)
        return 1
    print(f"[compare] all schemes completed successfully (outputs: {out_dir})")
    return 0


def merge_histories(histories: dict[str, RunHistory], path: Path) -> Path:
    """Write every row of every history with a leading scheme column."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("scheme", *CSV_COLUMNS))
        for label, history in histories.items():
            for row in history:
                writer.writerow([label, *row.csv_fields()])
    return path


def _load_histories(
    handles: list[WorkerHandle], failures: dict[str, str]
) -> dict[str, RunHistory]:
    histories: dict[str, RunHistory] = {}
    for handle in handles:
        path = handle.run_dir / "history.csv"
        if not path.exists():
            continue
        try:
            histories[handle.scheme] = read_history_csv(path)
        except (OSError, ValueError) as exc:
            failures.setdefault(handle.scheme, f"unreadable history: {exc}")
    return histories


def _overlay_graphs(
    config: ExperimentConfig, histories: dict[str, RunHistory], out_dir: Path
) -> None:
    references: dict[str, float] = {}
    if config.reference_budget:
        try:
            solution, initial_mesh = build_problem(config.problem, config.model)
            value = reference_energy(
                solution,
                initial_mesh,
                config.reference_budget,
                cross_check=config.reference_check,
            ).value
            references = dict.fromkeys(histories, value)
        except Exception as exc:
            print(f"[compare] warning: no reference energy: {exc!r}", file=sys.stderr)

    graph_jobs = (
        ("rate_elems", lambda: create_rate_elems_graph(histories, out_dir)),
        ("rate_time", lambda: create_rate_time_graph(histories, out_dir)),
        ("contraction", lambda: create_contraction_graph(histories, references, out_dir)),
        ("iterations", lambda: create_iterations_graph(histories, out_dir)),
        ("kappa", lambda: create_kappa_graph(histories, out_dir)),
    )
    for graph_name, graph_fn in graph_jobs:
        try:
            graph_fn()
        except Exception as exc:
            print(
                f"[compare] warning: failed to generate {graph_name} graph: {exc!r}",
                file=sys.stderr,
            )


def _launch(handle: WorkerHandle, config: ExperimentConfig) -> None:
    handle.run_dir.mkdir(parents=True, exist_ok=True)
    handle.log_file = handle.log_path.open("wb")
    env = os.environ.copy()
    env[STATUS_FILE_ENV] = str(handle.status_path)
    handle.proc = subprocess.Popen(
        build_worker_cmd(config, handle.scheme, handle.run_dir),
        stdout=handle.log_file,
        stderr=subprocess.STDOUT,
        cwd=str(Path.cwd()),
        env=env,
    )


def build_worker_cmd(config: ExperimentConfig, scheme: str, run_dir: Path) -> list[str]:
    """Construct a standalone CLI invocation for one scheme."""
    adaptive = config.adaptive
    spec = replace(adaptive.scheme, kind=scheme)
    cmd = [
        sys.executable,
        "-m",
        "ailfem",
        "--scheme",
        spec.kind,
        "--delta-z",
        repr(spec.delta_z),
        "--newton-damping",
        repr(spec.newton_damping),
        "--theta",
        repr(adaptive.theta),
        "--lambda",
        repr(adaptive.lambda_),
        "--max-elements",
        str(adaptive.max_elements),
        "--max-inner",
        str(adaptive.max_inner_iterations),
        "--solver-rtol",
        repr(adaptive.solver_rel_tol),
        "--problem",
        config.problem,
        "--model",
        config.model,
        "--seed",
        str(config.seed),
        "--reference-budget",
        str(config.reference_budget),
        "--out",
        str(run_dir),
        "--no-live",
    ]
    if config.preset is not None:
        cmd.extend(["--preset", config.preset])
    if not config.plots:
        cmd.append("--no-plots")
    if config.mesh_dump:
        cmd.append("--mesh-dump")
    if not config.reference_check:
        cmd.append("--no-reference-check")
    if not spec.newton_correction:
        cmd.append("--no-newton-correction")
    return cmd


def _graceful_stop_workers(
    handles: list[WorkerHandle], grace_seconds: float = 5.0
) -> None:
    procs = [h.proc for h in handles if h.proc is not None]
    # workers handle KeyboardInterrupt and still write their outputs
    for proc in procs:
        if proc.poll() is None:
            try:
                proc.send_signal(signal.SIGINT)
            except Exception:
                pass

    deadline = time.monotonic() + grace_seconds
    while time.monotonic() < deadline:
        if all(proc.poll() is not None for proc in procs):
            return
        time.sleep(0.1)

    for proc in procs:
        if proc.poll() is None:
            try:
                proc.terminate()
            except Exception:
                pass

    deadline = time.monotonic() + 2.0
    while time.monotonic() < deadline:
        if all(proc.poll() is not None for proc in procs):
            return
        time.sleep(0.1)

    for proc in procs:
        if proc.poll() is None:
            try:
                proc.kill()
            except Exception:
                pass


def _render_dashboard(
    handles: list[WorkerHandle], out_dir: Path, start_time: float
) -> Panel:
    elapsed = int(time.monotonic() - start_time)

    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Scheme")
    table.add_column("Status")
    table.add_column("N", justify="right")
    table.add_column("n", justify="right")
    table.add_column("Step", justify="right")
    table.add_column("Elements", justify="right")
    table.add_column("Estimator", justify="right")
    table.add_column("Log")

    for handle in handles:
        snap = _parse_worker_status(handle.status_path)
        table.add_row(
            handle.scheme,
            _worker_status(handle.proc),
            snap["N"],
            snap["n"],
            snap["step"],
            snap["elems"],
            snap["eta"],
            handle.log_path.name,
        )

    running = sum(1 for h in handles if h.proc is not None and h.proc.poll() is None)
    title = (
        f"[bold blue]AILFEM scheme comparison[/bold blue] "
        f"workers={len(handles)} running={running} elapsed={elapsed}s"
    )
    return Panel(table, title=title, subtitle=f"output: {out_dir}", border_style="blue")


def _worker_status(proc: subprocess.Popen[bytes] | None) -> str:
    if proc is None:
        return "queued"
    code = proc.poll()
    if code is None:
        return "running"
    if code == 0:
        return "done"
    return f"failed({code})"


def _parse_worker_status(status_path: Path) -> dict[str, str]:
    empty = dict.fromkeys(("N", "n", "step", "elems", "eta"), "-")
    if not status_path.exists():
        return empty
    try:
        payload = json.loads(status_path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return empty
    eta = payload.get("eta")
    return {
        "N": str(payload.get("N", "-")),
        "n": str(payload.get("n", "-")),
        "step": str(payload.get("step", "-")),
        "elems": str(payload.get("elems", "-")),
        "eta": "-" if eta is None else f"{eta:.3e}",
    }
