"""
Run telemetry over the index set of (mesh N, inner step n) pairs.
"""

import csv
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

CSV_COLUMNS = (
    "N",
    "n",
    "step",
    "elems",
    "dofs",
    "eta",
    "energy",
    "energy_drop",
    "error",
    "quasi_error",
    "kappa",
    "dt_s",
    "cum_elems",
)

_INT_COLUMNS = frozenset({"N", "n", "step", "elems", "dofs", "cum_elems"})


@dataclass(frozen=True)
class HistoryRow:
    N: int
    n: int
    step: int
    elems: int
    dofs: int
    eta: float
    energy: float
    energy_drop: float  # E(u^{n-1}) - E(u^n), nan for n = 0
    error: float
    quasi_error: float
    kappa: float  # energy_drop / increment^2, nan when undefined
    dt_s: float
    cum_elems: int
    increment: float = math.nan  # ||u^{n-1} - u^n||_X
    damping: float = math.nan
    halvings: int = 0

    def csv_fields(self) -> list[str]:
        return [_format(getattr(self, column)) for column in CSV_COLUMNS]


@dataclass(frozen=True)
class MeshSummary:
    N: int
    elems: int
    dofs: int
    steps: int  # number of inner steps on this mesh
    eta: float
    error: float
    energy_initial: float
    energy_final: float
    kappa: float
    marked: int | None


@dataclass
class RunHistory:
    rows: list[HistoryRow] = field(default_factory=list)
    marked: dict[int, int] = field(default_factory=dict)  # N -> number of marked elements
    stop_reason: str | None = None

    def append(self, row: HistoryRow) -> None:
        if self.rows and row.step <= self.rows[-1].step:
            raise ValueError(
                f"step counter must increase, got {row.step} after {self.rows[-1].step}"
            )
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[HistoryRow]:
        return iter(self.rows)

    @property
    def last(self) -> HistoryRow | None:
        return self.rows[-1] if self.rows else None

    def meshes(self) -> list[int]:
        return sorted({row.N for row in self.rows})

    def rows_for(self, N: int) -> list[HistoryRow]:
        rows = [row for row in self.rows if row.N == N]
        if not rows:
            raise ValueError(f"no rows recorded for mesh {N}")
        return rows

    def final_rows(self) -> list[HistoryRow]:
        """Last row of every mesh."""
        last: dict[int, HistoryRow] = {}
        for row in self.rows:
            last[row.N] = row
        return [last[N] for N in sorted(last)]

    def inner_steps(self, N: int) -> int:
        return self.rows_for(N)[-1].n

    def total_inner_steps(self) -> int:
        return sum(row.n for row in self.final_rows())

    def mesh_summary(self, N: int) -> MeshSummary:
        rows = self.rows_for(N)
        first, final = rows[0], rows[-1]
        return MeshSummary(
            N=N,
            elems=final.elems,
            dofs=final.dofs,
            steps=final.n,
            eta=final.eta,
            error=final.error,
            energy_initial=first.energy,
            energy_final=final.energy,
            kappa=final.kappa,
            marked=self.marked.get(N),
        )

    def mesh_summaries(self) -> list[MeshSummary]:
        return [self.mesh_summary(N) for N in self.meshes()]

    # ------------------------------------------------------------------
    # CSV
    # ------------------------------------------------------------------

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(row.csv_fields())
        return path


def read_history_csv(path: str | Path) -> RunHistory:
    path = Path(path)
    history = RunHistory()
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames[: len(CSV_COLUMNS)]) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected history columns {reader.fieldnames}")
        for record in reader:
            values = {
                column: int(record[column]) if column in _INT_COLUMNS else float(record[column])
                for column in CSV_COLUMNS
            }
            history.append(HistoryRow(**values))
    return history


def contraction_factor(history: RunHistory, N: int, reference_energy: float) -> float:
    """``(E(u_N^final) - E*) / (E(u_N^0) - E*)``."""
    rows = history.rows_for(N)
    energies = [row.energy for row in rows]
    if not math.isfinite(reference_energy) or not all(
        reference_energy < energy for energy in energies
    ):
        raise ValueError(
            f"reference energy {reference_energy!r} is not below every energy of mesh {N}"
        )
    return (energies[-1] - reference_energy) / (energies[0] - reference_energy)


def f4_quotient(history: RunHistory, N: int) -> float | None:
    """Energy drop over squared increment of the last inner step on mesh N.

    ``None`` when the last two iterates coincide.
    """
    final = history.rows_for(N)[-1]
    if final.n < 1:
        raise ValueError(f"mesh {N} has no inner steps")
    if math.isnan(final.kappa):
        return None
    return final.kappa


def kappa_value(energy_drop: float, increment: float) -> float:
    if increment == 0.0 or math.isnan(increment):
        return math.nan
    return energy_drop / (increment * increment)


def _format(value: int | float) -> str:
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")
