"""
Rich-based live dashboard for adaptive runs.

Usage:
    logger = AilfemLogger(run_dir=..., config=...)
    with logger:
        logger.start()
        AdaptiveEngine(..., observers=[logger]).run()
    logger.print_summary(history, elapsed)

The logger is a run observer: the engine calls ``on_row`` for every visited
``(N, n)`` and ``on_event`` for mesh and damping events.
"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

from rich.columns import Columns
from rich.console import Console, ConsoleOptions, RenderResult
from rich.live import Live
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ailfem.config import ExperimentConfig
from ailfem.history import HistoryRow, RunHistory

STATUS_FILE_ENV = "AILFEM_STATUS_FILE"

log = logging.getLogger(__name__)


@dataclass
class RunState:
    N: int = 0
    n: int = 0
    step: int = 0
    elems: int = 0
    dofs: int = 0
    eta: float = math.nan
    energy: float = math.nan
    error: float = math.nan
    start_time: float | None = None
    events: list[Text] = field(default_factory=list)

    def elapsed_str(self) -> str:
        if self.start_time is None:
            return "00:00:00"
        secs = int(time.monotonic() - self.start_time)
        return str(timedelta(seconds=secs))


class RunDisplay:
    def __init__(self, run_dir: Path, config: ExperimentConfig, state: RunState):
        self._run_dir = run_dir
        self._config = config
        self._state = state

    def render_header(self) -> Panel:
        adaptive = self._config.adaptive
        grid = Table.grid(padding=(0, 2))
        grid.add_column(style="bold cyan", min_width=16)
        grid.add_column()
        grid.add_row("Run dir:", str(self._run_dir))
        grid.add_row("Problem:", f"{self._config.problem} ({self._config.model})")
        grid.add_row("Scheme:", adaptive.scheme.label)
        grid.add_row(
            "Parameters:",
            f"theta={adaptive.theta:g}  lambda={adaptive.lambda_:g}",
        )
        grid.add_row("Stop condition:", f"elements > {adaptive.max_elements}")
        return Panel(grid, title="[bold blue]AILFEM[/bold blue]", border_style="blue")

    def render_stats(self) -> Panel:
        state = self._state
        grid = Table.grid(padding=(0, 3))
        grid.add_column(style="bold", min_width=14)
        grid.add_column(justify="right", style="bright_white")
        grid.add_row("Mesh N:", str(state.N))
        grid.add_row("Inner n:", str(state.n))
        grid.add_row("Total step:", str(state.step))
        grid.add_row("Elements:", str(state.elems))
        grid.add_row("Dofs:", str(state.dofs))
        grid.add_row("Estimator:", f"{state.eta:.4e}")
        grid.add_row("Energy:", f"{state.energy:.10g}")
        grid.add_row("Error:", f"{state.error:.4e}")
        grid.add_row("Elapsed:", state.elapsed_str())
        return Panel(grid, title="[bold green]Stats[/bold green]", border_style="green")

    def render_events(self) -> Panel:
        body = Text()
        for entry in self._state.events:
            body.append_text(entry)
            body.append("\n")
        return Panel(
            body,
            title="[bold yellow]Events[/bold yellow]",
            border_style="yellow",
        )

    def render_body(self) -> Columns:
        return Columns([self.render_stats(), self.render_events()], expand=True)


class AilfemLogger:
    _MAX_EVENTS = 4

    def __init__(self, run_dir: Path, config: ExperimentConfig) -> None:
        self._run_dir = run_dir
        self._config = config
        self._console = Console()
        self._state = RunState()
        self._display = RunDisplay(run_dir, config, self._state)
        status_file = os.environ.get(STATUS_FILE_ENV)
        self._status_file = Path(status_file).resolve() if status_file else None

        self._live: Live | None = None
        if config.live:
            self._live = Live(
                self,
                console=self._console,
                refresh_per_second=4,
                vertical_overflow="visible",
            )

    # ------------------------------------------------------------------
    # Context manager, wraps Live
    # ------------------------------------------------------------------

    def __enter__(self) -> "AilfemLogger":
        if self._live is not None:
            self._live.__enter__()
        return self

    def __exit__(self, *args) -> None:
        if self._live is not None:
            self._live.__exit__(*args)

    # ------------------------------------------------------------------
    # Rich renderable protocol
    # ------------------------------------------------------------------

    def __rich_console__(
        self, console: Console, options: ConsoleOptions
    ) -> RenderResult:
        yield self._display.render_header()
        yield self._display.render_body()

    # ------------------------------------------------------------------
    # Observer API
    # ------------------------------------------------------------------

    def start(self) -> None:
        """Call once before the adaptive loop starts."""
        self._state.start_time = time.monotonic()
        self._write_status(running=True)

    def on_row(self, row: HistoryRow) -> None:
        state = self._state
        state.N, state.n, state.step = row.N, row.n, row.step
        state.elems, state.dofs = row.elems, row.dofs
        state.eta, state.energy, state.error = row.eta, row.energy, row.error
        self._write_status(running=True)

    def on_event(self, message: str, style: str = "") -> None:
        self._push_event(message, style)

    def log_stop_reason(self, reason: str) -> None:
        self._push_event(f"Stopped: {reason}", style="bold yellow")
        self._write_status(running=True, stop_reason=reason)

    def print_summary(self, history: RunHistory, elapsed: float) -> None:
        """Print a final summary below the dashboard after Live exits."""
        elapsed_str = str(timedelta(seconds=int(elapsed)))
        last = history.last
        self._console.print()
        self._console.rule("[bold]Run complete[/bold]")
        summary = Table.grid(padding=(0, 2))
        summary.add_column(style="bold")
        summary.add_column(style="cyan")
        summary.add_row("Meshes:", str(len(history.meshes())))
        summary.add_row("Inner steps:", str(history.total_inner_steps()))
        if last is not None:
            summary.add_row("Elements:", str(last.elems))
            summary.add_row("Estimator:", f"{last.eta:.6e}")
            summary.add_row("Error:", f"{last.error:.6e}")
        summary.add_row("Stop reason:", str(history.stop_reason))
        summary.add_row("Elapsed:", elapsed_str)
        summary.add_row("Results:", str(self._run_dir))
        self._console.print(summary)
        self._write_status(running=False, stop_reason=history.stop_reason)

    # ------------------------------------------------------------------
    # Private helpers
    # ------------------------------------------------------------------

    def _push_event(self, message: str, style: str = "") -> None:
        if self._live is None:
            log.info(message)
            return
        self._state.events.append(Text(message, style=style))
        if len(self._state.events) > self._MAX_EVENTS:
            self._state.events.pop(0)

    def _write_status(self, running: bool, stop_reason: str | None = None) -> None:
        if self._status_file is None:
            return

        state = self._state
        payload = {
            "N": state.N,
            "n": state.n,
            "step": state.step,
            "elems": state.elems,
            "dofs": state.dofs,
            "eta": state.eta if math.isfinite(state.eta) else None,
            "error": state.error if math.isfinite(state.error) else None,
            "elapsed_s": int(time.monotonic() - (state.start_time or time.monotonic())),
            "running": running,
            "stop_reason": stop_reason,
        }

        self._status_file.parent.mkdir(parents=True, exist_ok=True)
        temp_path = self._status_file.with_suffix(self._status_file.suffix + ".tmp")
        temp_path.write_text(json.dumps(payload), encoding="utf-8")
        temp_path.replace(self._status_file)
