"""Plain text run summaries."""

import math
from collections.abc import Callable, Mapping
from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING

from ailfem.history import RunHistory
from ailfem.metrics.rates import (
    OPTIMAL_BAND,
    crossover,
    effectivity_range,
    inner_step_counts,
    loglog_slope,
    mesh_series,
    ordering_share,
    tail_slope,
)

if TYPE_CHECKING:
    from ailfem.config import ExperimentConfig
    from ailfem.reference import ReferenceEnergy
    from ailfem.theory import TheoryConstants

# slope column -> (abscissa, ordinate)
SLOPE_SERIES = {
    "eta_vs_elems": ("elems", "eta"),
    "error_vs_elems": ("elems", "error"),
    "eta_vs_cum_elems": ("cum_elems", "eta"),
    "eta_vs_time": ("dt_s", "eta"),
}


def fitted_slopes(history: RunHistory) -> dict[str, float | None]:
    """Tail (last decade) slope of every series in :data:`SLOPE_SERIES`."""
    slopes: dict[str, float | None] = {}
    for name, (xcol, ycol) in SLOPE_SERIES.items():
        x, y = mesh_series(history, xcol), mesh_series(history, ycol)
        slopes[name] = _safe(tail_slope, x, y)
    return slopes


def generate_run_summary(
    *,
    run_dir: Path,
    history: RunHistory,
    config: "ExperimentConfig",
    constants: "TheoryConstants | None" = None,
    reference: "ReferenceEnergy | None" = None,
    elapsed: float | None = None,
) -> Path:
    """Write ``summary.txt`` and return its path."""
    adaptive = config.adaptive
    lines = [
        f"AILFEM run summary ({run_dir.name})",
        f"generated: {datetime.now().isoformat(timespec='seconds')}",
        "",
        "[parameters]",
        f"problem           {config.problem} ({config.model})",
        f"scheme            {adaptive.scheme.label}",
        f"theta             {adaptive.theta:g}",
        f"lambda            {adaptive.lambda_:g}",
        f"max_elements      {adaptive.max_elements}",
        "",
    ]
    if constants is not None:
        lines.append("[constants]")
        for key, value in constants.as_dict().items():
            lines.append(f"{key:<17} {_fmt(value)}")
        lines.append("")

    elems = mesh_series(history, "elems")
    eta = mesh_series(history, "eta")
    lines.append("[rates]")
    for name, slope in fitted_slopes(history).items():
        lines.append(f"{name:<17} {_fmt(slope)}")
    lines.append(f"{'eta_vs_elems_all':<17} {_fmt(_safe(loglog_slope, elems, eta))}")
    lines.append(f"{'crossover_elems':<17} {_fmt(crossover(elems, eta, OPTIMAL_BAND))}")
    lines.append("")

    last = history.last
    low, high = effectivity_range(history)
    lines.extend(
        [
            "[result]",
            f"meshes            {len(history.meshes())}",
            f"inner_steps       {history.total_inner_steps()}",
            f"final_elems       {_fmt(last.elems if last else None)}",
            f"final_eta         {_fmt(last.eta if last else None)}",
            f"final_error       {_fmt(last.error if last else None)}",
            f"effectivity       [{_fmt(low)}, {_fmt(high)}]",
            f"wall_time_s       {_fmt(last.dt_s if last else None)}",
            f"elapsed_s         {_fmt(elapsed)}",
            f"stop_reason       {history.stop_reason or 'not available'}",
        ]
    )
    if reference is not None:
        lines.append(f"reference_energy  {_fmt(reference.value)}")
        lines.append(f"reference_check   {_fmt(reference.discrepancy)}")

    path = run_dir / "summary.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def generate_compare_summary(
    *, out_dir: Path, histories: Mapping[str, RunHistory], failures: Mapping[str, str]
) -> Path:
    """Write ``compare_summary.txt`` for several schemes run on shared parameters."""
    lines = ["AILFEM scheme comparison", ""]
    header = (
        f"{'scheme':<13} {'eta/elems':>10} {'err/elems':>10} {'eta/cost':>10} "
        f"{'crossover':>10} {'steps':>7} {'stop':<16}"
    )
    lines.append(header)
    for label, history in histories.items():
        slopes = fitted_slopes(history)
        elems = mesh_series(history, "elems")
        cross = crossover(elems, mesh_series(history, "eta"), OPTIMAL_BAND)
        lines.append(
            f"{label:<13} {_fmt(slopes['eta_vs_elems'], '.3f'):>10} "
            f"{_fmt(slopes['error_vs_elems'], '.3f'):>10} "
            f"{_fmt(slopes['eta_vs_cum_elems'], '.3f'):>10} "
            f"{_fmt(cross, '.0f'):>10} {history.total_inner_steps():>7} "
            f"{history.stop_reason or '-':<16}"
        )
    for label, reason in failures.items():
        lines.append(f"{label:<13} failed: {reason}")

    order = [name for name in ("zarantonello", "kacanov", "newton") if name in histories]
    if len(order) > 1:
        share = ordering_share(*(inner_step_counts(histories[name]) for name in order))
        lines.append("")
        lines.append(f"share of meshes with steps {' >= '.join(order)}: {_fmt(share, '.3f')}")

    path = out_dir / "compare_summary.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _safe(compute: Callable[..., float], *args) -> float | None:
    try:
        return compute(*args)
    except ValueError:
        return None


def _fmt(value: object, spec: str = ".6g") -> str:
    if value is None:
        return "not available"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format(value, spec)
    return str(value)
