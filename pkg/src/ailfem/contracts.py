"""Runtime contracts for components wired into the adaptive engine."""

from typing import Protocol, runtime_checkable

from ailfem.history import HistoryRow, MeshSummary


class RunObserver(Protocol):
    """Minimum observer contract required by the engine."""

    def on_row(self, row: HistoryRow) -> None:
        """Receive one telemetry row per visited (N, n)."""
        ...


@runtime_checkable
class SupportsMeshRecord(Protocol):
    """Optional observer capability: per-mesh summary once the inner loop stopped."""

    def on_mesh(self, summary: MeshSummary) -> None: ...


@runtime_checkable
class SupportsEvents(Protocol):
    """Optional observer capability: human readable run events."""

    def on_event(self, message: str, style: str = "") -> None: ...
