from ailfem.estimator.indicators import (
    IndicatorField,
    edge_jumps,
    local_indicators,
    subset_total,
    total,
)

__all__ = ["IndicatorField", "edge_jumps", "local_indicators", "subset_total", "total"]
