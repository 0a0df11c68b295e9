from .graphs import (
    create_contraction_graph,
    create_iterations_graph,
    create_kappa_graph,
    create_rate_elems_graph,
    create_rate_time_graph,
)
from .rates import (
    crossover,
    loglog_slope,
    tail_slope,
    window_slope,
    windowed_slopes,
)
from .recorder import TelemetryRecorder
from .report import fitted_slopes, generate_compare_summary, generate_run_summary

__all__ = [
    "TelemetryRecorder",
    "create_contraction_graph",
    "create_iterations_graph",
    "create_kappa_graph",
    "create_rate_elems_graph",
    "create_rate_time_graph",
    "crossover",
    "fitted_slopes",
    "generate_compare_summary",
    "generate_run_summary",
    "loglog_slope",
    "tail_slope",
    "window_slope",
    "windowed_slopes",
]
