"""
View the contents of an adaptive run results database.
"""

import argparse
import sqlite3
from pathlib import Path


def _conn(db_path: Path) -> sqlite3.Connection:
    if not db_path.exists():
        raise FileNotFoundError(f"Database not found: {db_path}")
    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    return conn


def _num(value: object, spec: str = ".4e") -> str:
    return "-" if value is None else format(value, spec)


def show_runs(conn: sqlite3.Connection) -> None:
    rows = conn.execute(
        "SELECT id, scheme, started_at, finished_at, stop_reason FROM runs ORDER BY id"
    ).fetchall()
    print(f"=== Runs ({len(rows)}) ===")
    for row in rows:
        print(
            f"  [{row['id']:>3}] {row['scheme']:<13} started={row['started_at']}  "
            f"finished={row['finished_at'] or '-'}  stop={row['stop_reason'] or '-'}"
        )
    print()


def show_meshes(conn: sqlite3.Connection, run_id: int) -> None:
    rows = conn.execute(
        """
        SELECT N, elems, dofs, marked, steps, eta, error, kappa
        FROM meshes WHERE run_id = ? ORDER BY N
        """,
        (run_id,),
    ).fetchall()
    print(f"=== Meshes of run {run_id} ({len(rows)}) ===")
    print(f"  {'N':>4} {'elems':>8} {'dofs':>8} {'marked':>7} {'steps':>5} "
          f"{'eta':>11} {'error':>11} {'kappa':>11}")
    for row in rows:
        marked = "-" if row["marked"] is None else str(row["marked"])
        print(
            f"  {row['N']:>4} {row['elems']:>8} {row['dofs']:>8} {marked:>7} "
            f"{row['steps']:>5} {_num(row['eta']):>11} {_num(row['error']):>11} "
            f"{_num(row['kappa']):>11}"
        )
    print()


def show_history(conn: sqlite3.Connection, run_id: int, limit: int) -> None:
    rows = conn.execute(
        """
        SELECT N, n, step, elems, eta, energy, energy_drop, error, dt_s
        FROM history WHERE run_id = ? ORDER BY step DESC LIMIT ?
        """,
        (run_id, limit),
    ).fetchall()
    print(f"=== Last {len(rows)} history rows of run {run_id} ===")
    for row in reversed(rows):
        print(
            f"  ({row['N']:>3},{row['n']:>3}) step={row['step']:>5} elems={row['elems']:>7} "
            f"eta={_num(row['eta'])} energy={_num(row['energy'], '.12g')} "
            f"drop={_num(row['energy_drop'])} error={_num(row['error'])} "
            f"t={row['dt_s']:.2f}s"
        )
    print()


def main() -> int:
    parser = argparse.ArgumentParser(description="View an adaptive run results database")
    parser.add_argument("db_path", type=Path, help="Path to the results.db file")
    parser.add_argument("--run", type=int, default=None, help="Run id (default: all runs)")
    parser.add_argument(
        "--rows", type=int, default=10, help="Number of trailing history rows (default: 10)"
    )
    args = parser.parse_args()

    conn = _conn(args.db_path)
    show_runs(conn)
    run_ids = (
        [args.run]
        if args.run is not None
        else [row[0] for row in conn.execute("SELECT id FROM runs ORDER BY id")]
    )
    for run_id in run_ids:
        show_meshes(conn, run_id)
        show_history(conn, run_id, args.rows)
    conn.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
