"""Matplotlib helpers for rendering convergence graphs as SVG."""

from collections.abc import Mapping
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ailfem.history import RunHistory
from ailfem.metrics.rates import contraction_series, mesh_series

Histories = Mapping[str, RunHistory]

_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:purple", "tab:orange")


def create_rate_elems_graph(histories: Histories, output_dir: Path) -> Path | None:
    """Estimator and error against the number of elements."""
    return _rate_graph(histories, output_dir, "rate_elems.svg", "elems", "Number of elements")


def create_rate_time_graph(histories: Histories, output_dir: Path) -> Path | None:
    """Estimator and error against the cumulative computational time."""
    return _rate_graph(
        histories, output_dir, "rate_time.svg", "dt_s", "Cumulative time (s)"
    )


def create_contraction_graph(
    histories: Histories, reference_energies: Mapping[str, float], output_dir: Path
) -> Path | None:
    """Energy contraction factor per mesh."""
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    plotted = False
    for color, (label, history) in zip(_cycle(), histories.items()):
        reference = reference_energies.get(label)
        if reference is None:
            continue
        elems, factors = contraction_series(history, reference)
        keep = factors > 0.0
        if not np.any(keep):
            continue
        ax.plot(elems[keep], factors[keep], marker="o", markersize=3, color=color, label=label)
        plotted = True
    if not plotted:
        plt.close(fig)
        return None
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_title("Energy contraction per mesh")
    ax.set_ylabel("Contraction factor")
    return _save(fig, ax, output_dir / "contraction.svg", "Number of elements")


def create_iterations_graph(histories: Histories, output_dir: Path) -> Path | None:
    """Inner linearization steps per mesh."""
    if not _has_rows(histories):
        return None
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for color, (label, history) in zip(_cycle(), histories.items()):
        ax.plot(
            mesh_series(history, "elems"),
            mesh_series(history, "n"),
            marker="o",
            markersize=3,
            drawstyle="steps-post",
            color=color,
            label=label,
        )
    ax.set_xscale("log")
    ax.set_title("Linearization steps per mesh")
    ax.set_ylabel("Inner steps")
    return _save(fig, ax, output_dir / "iterations.svg", "Number of elements")


def create_kappa_graph(
    histories: Histories,
    output_dir: Path,
    lower_bounds: Mapping[str, float] | None = None,
) -> Path | None:
    """Energy drop over squared increment of the last step on every mesh."""
    if not _has_rows(histories):
        return None
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for color, (label, history) in zip(_cycle(), histories.items()):
        elems = mesh_series(history, "elems")
        kappa = mesh_series(history, "kappa")
        keep = np.isfinite(kappa)
        ax.plot(elems[keep], kappa[keep], marker="o", markersize=3, color=color, label=label)
        bound = (lower_bounds or {}).get(label)
        if bound is not None and bound > 0.0:
            ax.axhline(bound, color=color, linestyle=":", linewidth=1.0)
    ax.set_xscale("log")
    ax.set_title("Energy drop over squared increment")
    ax.set_ylabel("kappa")
    return _save(fig, ax, output_dir / "kappa.svg", "Number of elements")


def _rate_graph(
    histories: Histories, output_dir: Path, filename: str, column: str, xlabel: str
) -> Path | None:
    if not _has_rows(histories):
        return None
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    anchor: tuple[float, float] | None = None
    for color, (label, history) in zip(_cycle(), histories.items()):
        x = mesh_series(history, column)
        eta = mesh_series(history, "eta")
        error = mesh_series(history, "error")
        keep = x > 0.0
        ax.plot(x[keep], eta[keep], marker="o", markersize=3, color=color, label=f"{label} eta")
        ax.plot(
            x[keep], error[keep], linestyle="--", color=color, linewidth=1.0,
            label=f"{label} error",
        )
        if anchor is None and np.any(keep):
            anchor = (float(x[keep][0]), float(eta[keep][0]))

    if column == "elems" and anchor is not None:
        x0, y0 = anchor
        guide = np.array([x0, x0 * 1e3])
        ax.plot(guide, 0.5 * y0 * (guide / x0) ** -0.5, color="black", linewidth=0.8,
                linestyle=":", label="slope -1/2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_title("Convergence")
    ax.set_ylabel("Estimator / error")
    return _save(fig, ax, output_dir / filename, xlabel)


def _save(fig, ax, output_path: Path, xlabel: str) -> Path:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    ax.set_xlabel(xlabel)
    ax.grid(True, which="both", alpha=0.35)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(output_path, format="svg")
    plt.close(fig)
    return output_path


def _has_rows(histories: Histories) -> bool:
    return any(len(history) for history in histories.values())


def _cycle():
    while True:
        yield from _COLORS
