"""Module evaluation - Intensité empirique, pente QQ et rapports"""
from .metrics import (
    IntensityCurve,
    QqResult,
    empirical_intensity,
    exponential_quantiles,
    intensity_deviation,
    pooled_increments,
    qq_from_increments,
    qq_slope,
)
from .report import (
    MATPLOTLIB_AVAILABLE,
    EvaluationRecord,
    emit_report,
    plot_intensity_curves,
    plot_qq,
    records_to_frame,
    summarize,
    table_for_metric,
)
