"""Run every scheme on every preset and emit summary artifacts.

Outputs:
- results.csv: one row per run
- summary.md: aggregated per-scheme + detailed per-run tables
"""

import argparse
import csv
import math
import sqlite3
import subprocess
import sys
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from ailfem.config import available_presets
from ailfem.history import read_history_csv
from ailfem.metrics.rates import mesh_series, tail_slope
from ailfem.schemes.base import SCHEME_KINDS


@dataclass
class RunRecord:
    preset: str
    scheme: str
    exit_code: int
    runtime_s: float
    run_dir: str
    stop_reason: str
    meshes: int
    inner_steps: int
    final_elems: int
    final_eta: float
    final_error: float
    eta_slope: float
    cost_slope: float


def _parse_choices(raw: str | None, builtins: tuple[str, ...], flag: str) -> list[str]:
    if raw is None:
        return list(builtins)

    chosen = [p.strip() for p in raw.split(",") if p.strip()]
    if not chosen:
        raise ValueError(f"{flag} must include at least one name")

    invalid = [p for p in chosen if p not in builtins]
    if invalid:
        raise ValueError(
            f"Unknown {flag[2:]}: {', '.join(invalid)}. Available: {', '.join(builtins)}"
        )
    return chosen


def _read_run_metrics(run_dir: Path) -> dict[str, int | float | str]:
    metrics: dict[str, int | float | str] = {
        "stop_reason": "",
        "meshes": 0,
        "inner_steps": 0,
        "final_elems": 0,
        "final_eta": math.nan,
        "final_error": math.nan,
        "eta_slope": math.nan,
        "cost_slope": math.nan,
    }
    db_path = run_dir / "results.db"
    if db_path.is_file():
        conn = sqlite3.connect(db_path)
        conn.row_factory = sqlite3.Row
        try:
            row = conn.execute(
                """
                SELECT
                    runs.stop_reason AS stop_reason,
                    (SELECT COUNT(*) FROM meshes WHERE run_id = runs.id) AS meshes,
                    (SELECT COUNT(*) FROM history WHERE run_id = runs.id AND n > 0)
                        AS inner_steps
                FROM runs
                ORDER BY id DESC
                LIMIT 1
                """
            ).fetchone()
        finally:
            conn.close()
        if row is not None:
            metrics["stop_reason"] = row["stop_reason"] or ""
            metrics["meshes"] = int(row["meshes"])
            metrics["inner_steps"] = int(row["inner_steps"])

    history_path = run_dir / "history.csv"
    if not history_path.is_file():
        return metrics
    history = read_history_csv(history_path)
    if not len(history):
        return metrics
    metrics["final_elems"] = history.last.elems
    metrics["final_eta"] = history.last.eta
    metrics["final_error"] = history.last.error
    eta = mesh_series(history, "eta")
    try:
        metrics["eta_slope"] = tail_slope(mesh_series(history, "elems"), eta)
        metrics["cost_slope"] = tail_slope(mesh_series(history, "cum_elems"), eta)
    except ValueError:
        pass
    return metrics


def _build_cmd(preset: str, scheme: str, run_dir: Path, max_elements: int) -> list[str]:
    return [
        sys.executable,
        "-m",
        "ailfem",
        "--preset",
        preset,
        "--scheme",
        scheme,
        "--max-elements",
        str(max_elements),
        "--out",
        str(run_dir),
        "--no-live",
    ]


def _write_csv(path: Path, rows: list[RunRecord]) -> None:
    fieldnames = [
        "preset",
        "scheme",
        "exit_code",
        "runtime_s",
        "run_dir",
        "stop_reason",
        "meshes",
        "inner_steps",
        "final_elems",
        "final_eta",
        "final_error",
        "eta_slope",
        "cost_slope",
    ]

    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    "preset": row.preset,
                    "scheme": row.scheme,
                    "exit_code": row.exit_code,
                    "runtime_s": f"{row.runtime_s:.2f}",
                    "run_dir": row.run_dir,
                    "stop_reason": row.stop_reason,
                    "meshes": row.meshes,
                    "inner_steps": row.inner_steps,
                    "final_elems": row.final_elems,
                    "final_eta": f"{row.final_eta:.6e}",
                    "final_error": f"{row.final_error:.6e}",
                    "eta_slope": f"{row.eta_slope:.4f}",
                    "cost_slope": f"{row.cost_slope:.4f}",
                }
            )


def _mean(values: list[float]) -> float:
    finite = [value for value in values if math.isfinite(value)]
    return sum(finite) / len(finite) if finite else math.nan


def _aggregate_by_scheme(rows: list[RunRecord]) -> list[dict[str, str]]:
    grouped: dict[str, list[RunRecord]] = {}
    for row in rows:
        grouped.setdefault(row.scheme, []).append(row)

    output: list[dict[str, str]] = []
    for scheme in sorted(grouped):
        grp = grouped[scheme]
        count = len(grp)
        success = sum(1 for item in grp if item.exit_code == 0)
        output.append(
            {
                "scheme": scheme,
                "runs": str(count),
                "success": f"{success}/{count}",
                "avg_runtime": f"{_mean([item.runtime_s for item in grp]):.1f}",
                "avg_inner_steps": f"{_mean([float(item.inner_steps) for item in grp]):.1f}",
                "avg_eta_slope": f"{_mean([item.eta_slope for item in grp]):.3f}",
                "avg_cost_slope": f"{_mean([item.cost_slope for item in grp]):.3f}",
            }
        )
    return output


def _markdown_table(headers: list[str], rows: list[list[str]]) -> list[str]:
    out = [
        "| " + " | ".join(headers) + " |",
        "|" + "|".join(["---"] * len(headers)) + "|",
    ]
    for row in rows:
        out.append("| " + " | ".join(row) + " |")
    return out


def _write_summary(
    path: Path,
    *,
    batch_id: str,
    max_elements: int,
    presets: list[str],
    schemes: list[str],
    rows: list[RunRecord],
) -> None:
    aggregate = _aggregate_by_scheme(rows)

    lines = [
        f"# Experiment Summary ({batch_id})",
        "",
        f"- Generated: {datetime.now().isoformat(timespec='seconds')}",
        f"- Presets: {', '.join(presets)}",
        f"- Schemes: {', '.join(schemes)}",
        f"- Element budget per run: {max_elements}",
        "",
        "## Scheme Aggregates",
        "",
    ]

    agg_headers = [
        "Scheme",
        "Runs",
        "Success",
        "Avg Runtime(s)",
        "Avg Inner Steps",
        "Avg eta Slope",
        "Avg Cost Slope",
    ]
    agg_rows = [
        [
            row["scheme"],
            row["runs"],
            row["success"],
            row["avg_runtime"],
            row["avg_inner_steps"],
            row["avg_eta_slope"],
            row["avg_cost_slope"],
        ]
        for row in aggregate
    ]
    lines.extend(_markdown_table(agg_headers, agg_rows))

    lines.extend(["", "## Per-Run Results", ""])
    run_headers = [
        "Preset",
        "Scheme",
        "Exit",
        "Runtime(s)",
        "Stop",
        "Meshes",
        "Inner Steps",
        "Elements",
        "eta",
        "Error",
        "eta Slope",
        "Run Dir",
    ]
    run_rows = [
        [
            row.preset,
            row.scheme,
            str(row.exit_code),
            f"{row.runtime_s:.1f}",
            row.stop_reason,
            str(row.meshes),
            str(row.inner_steps),
            str(row.final_elems),
            f"{row.final_eta:.3e}",
            f"{row.final_error:.3e}",
            f"{row.eta_slope:.3f}",
            row.run_dir,
        ]
        for row in rows
    ]
    lines.extend(_markdown_table(run_headers, run_rows))

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> int:
    parser = argparse.ArgumentParser(description="Run every scheme on every preset")
    parser.add_argument(
        "--presets",
        default=None,
        help="Comma-separated built-in presets (default: all)",
    )
    parser.add_argument(
        "--schemes",
        default=None,
        help="Comma-separated linearization schemes (default: all)",
    )
    parser.add_argument(
        "--max-elements",
        type=int,
        default=200_000,
        help="Element budget per run (default: 200000)",
    )
    parser.add_argument(
        "--runs-root",
        type=Path,
        default=Path("runs"),
        help="Base runs directory (default: runs)",
    )
    parser.add_argument(
        "--output-dir",
        type=Path,
        default=None,
        help="Directory for experiment artifacts (default: runs/experiments/<timestamp>)",
    )
    args = parser.parse_args()

    if args.max_elements < 192:
        raise ValueError("--max-elements must be >= 192, the initial L-shape mesh")

    presets = _parse_choices(args.presets, available_presets(), "--presets")
    schemes = _parse_choices(args.schemes, SCHEME_KINDS, "--schemes")

    batch_id = datetime.now().strftime("%Y%m%d_%H%M%S")
    output_dir = args.output_dir or (args.runs_root / "experiments" / batch_id)
    output_dir.mkdir(parents=True, exist_ok=True)

    records: list[RunRecord] = []
    total = len(presets) * len(schemes)
    current = 0

    for preset in presets:
        for scheme in schemes:
            current += 1
            print(f"[{current}/{total}] preset={preset} scheme={scheme} ...", flush=True)

            run_dir = output_dir / "raw_runs" / f"preset_{preset}" / scheme
            cmd = _build_cmd(preset, scheme, run_dir, args.max_elements)

            started = time.monotonic()
            completed = subprocess.run(cmd, cwd=str(Path.cwd()), check=False)
            wall_time = time.monotonic() - started

            metrics = _read_run_metrics(run_dir)
            records.append(
                RunRecord(
                    preset=preset,
                    scheme=scheme,
                    exit_code=completed.returncode,
                    runtime_s=wall_time,
                    run_dir=str(run_dir),
                    stop_reason=str(metrics["stop_reason"]),
                    meshes=int(metrics["meshes"]),
                    inner_steps=int(metrics["inner_steps"]),
                    final_elems=int(metrics["final_elems"]),
                    final_eta=float(metrics["final_eta"]),
                    final_error=float(metrics["final_error"]),
                    eta_slope=float(metrics["eta_slope"]),
                    cost_slope=float(metrics["cost_slope"]),
                )
            )

    csv_path = output_dir / "results.csv"
    summary_path = output_dir / "summary.md"
    _write_csv(csv_path, records)
    _write_summary(
        summary_path,
        batch_id=batch_id,
        max_elements=args.max_elements,
        presets=presets,
        schemes=schemes,
        rows=records,
    )

    print(f"Wrote: {csv_path}")
    print(f"Wrote: {summary_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
