"""Telemetry recording observer for adaptive runs."""

import logging
from collections.abc import Callable
from typing import TYPE_CHECKING

from ailfem.history import HistoryRow, MeshSummary

if TYPE_CHECKING:
    from ailfem.storage.database import RunDatabase

logger = logging.getLogger(__name__)


class TelemetryRecorder:
    """Write every history row and mesh record of one run to the database.

    A failed write is reported once through ``report`` and never interrupts
    the run; later rows are still attempted.
    """

    def __init__(
        self,
        db: "RunDatabase",
        run_id: int,
        *,
        report: Callable[[str], None] | None = None,
    ) -> None:
        self._db = db
        self._run_id = run_id
        self._report = report or logger.warning
        self._reported_write_error = False
        self.rows_written = 0
        self.meshes_written = 0

    def on_row(self, row: HistoryRow) -> None:
        if self._guard(lambda: self._db.record_row(self._run_id, row)):
            self.rows_written += 1

    def on_mesh(self, summary: MeshSummary) -> None:
        if self._guard(lambda: self._db.record_mesh(self._run_id, summary)):
            self.meshes_written += 1

    def finalize(self, stop_reason: str | None) -> None:
        self._guard(lambda: self._db.finish_run(self._run_id, stop_reason))

    def _guard(self, write: Callable[[], None]) -> bool:
        try:
            write()
        except Exception as exc:
            if not self._reported_write_error:
                self._reported_write_error = True
                self._report(f"warning: failed to record telemetry: {exc!r}")
            return False
        return True
