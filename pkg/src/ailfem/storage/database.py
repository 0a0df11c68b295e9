"""
SQLite-backed storage for adaptive runs.
"""

import math
import sqlite3
from datetime import datetime, timezone
from pathlib import Path

from ailfem.history import CSV_COLUMNS, HistoryRow, MeshSummary


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _real(value: float) -> float | None:
    # sqlite has no NaN
    return None if value is None or math.isnan(value) else value


class RunDatabase:
    def __init__(self, db_path: str | Path):
        self.db_path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self.db_path)
        self._conn.row_factory = sqlite3.Row
        self._create_tables()

    def _create_tables(self) -> None:
        self._conn.executescript("""
            CREATE TABLE IF NOT EXISTS runs (
                id              INTEGER PRIMARY KEY AUTOINCREMENT,
                scheme          TEXT    NOT NULL,
                manifest        TEXT    NOT NULL,
                started_at      TEXT    NOT NULL,
                finished_at     TEXT,
                stop_reason     TEXT
            );

            CREATE TABLE IF NOT EXISTS history (
                id              INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id          INTEGER NOT NULL REFERENCES runs (id),
                N               INTEGER NOT NULL,
                n               INTEGER NOT NULL,
                step            INTEGER NOT NULL,
                elems           INTEGER NOT NULL,
                dofs            INTEGER NOT NULL,
                eta             REAL    NOT NULL,
                energy          REAL    NOT NULL,
                energy_drop     REAL,
                error           REAL    NOT NULL,
                quasi_error     REAL    NOT NULL,
                kappa           REAL,
                dt_s            REAL    NOT NULL,
                cum_elems       INTEGER NOT NULL,
                increment       REAL,
                damping         REAL,
                halvings        INTEGER NOT NULL DEFAULT 0
            );

            CREATE TABLE IF NOT EXISTS meshes (
                id              INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id          INTEGER NOT NULL REFERENCES runs (id),
                N               INTEGER NOT NULL,
                elems           INTEGER NOT NULL,
                dofs            INTEGER NOT NULL,
                marked          INTEGER,
                steps           INTEGER NOT NULL,
                eta             REAL    NOT NULL,
                error           REAL    NOT NULL,
                kappa           REAL
            );

            CREATE UNIQUE INDEX IF NOT EXISTS history_step ON history (run_id, step);
        """)
        self._conn.commit()

    # ------------------------------------------------------------------
    # Runs
    # ------------------------------------------------------------------

    def start_run(self, scheme: str, manifest: str) -> int:
        cursor = self._conn.execute(
            "INSERT INTO runs (scheme, manifest, started_at) VALUES (?, ?, ?)",
            (scheme, manifest, _now()),
        )
        self._conn.commit()
        return int(cursor.lastrowid)

    def finish_run(self, run_id: int, stop_reason: str | None) -> None:
        self._conn.execute(
            "UPDATE runs SET finished_at = ?, stop_reason = ? WHERE id = ?",
            (_now(), stop_reason, run_id),
        )
        self._conn.commit()

    # ------------------------------------------------------------------
    # Telemetry
    # ------------------------------------------------------------------

    def record_row(self, run_id: int, row: HistoryRow) -> None:
        self._conn.execute(
            """
            INSERT INTO history (
                run_id, N, n, step, elems, dofs, eta, energy, energy_drop, error,
                quasi_error, kappa, dt_s, cum_elems, increment, damping, halvings
            )
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                run_id,
                row.N,
                row.n,
                row.step,
                row.elems,
                row.dofs,
                row.eta,
                row.energy,
                _real(row.energy_drop),
                row.error,
                row.quasi_error,
                _real(row.kappa),
                row.dt_s,
                row.cum_elems,
                _real(row.increment),
                _real(row.damping),
                row.halvings,
            ),
        )
        self._conn.commit()

    def record_mesh(self, run_id: int, summary: MeshSummary) -> None:
        self._conn.execute(
            """
            INSERT INTO meshes (run_id, N, elems, dofs, marked, steps, eta, error, kappa)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                run_id,
                summary.N,
                summary.elems,
                summary.dofs,
                summary.marked,
                summary.steps,
                summary.eta,
                summary.error,
                _real(summary.kappa),
            ),
        )
        self._conn.commit()

    def get_history(self, run_id: int) -> list[HistoryRow]:
        rows = self._conn.execute(
            f"SELECT {', '.join(CSV_COLUMNS)}, increment, damping, halvings "
            "FROM history WHERE run_id = ? ORDER BY step",
            (run_id,),
        ).fetchall()
        return [
            HistoryRow(**{key: math.nan if row[key] is None else row[key] for key in row.keys()})
            for row in rows
        ]

    def get_mesh_count(self, run_id: int) -> int:
        return int(
            self._conn.execute(
                "SELECT COUNT(*) FROM meshes WHERE run_id = ?", (run_id,)
            ).fetchone()[0]
        )

    def close(self) -> None:
        self._conn.close()
