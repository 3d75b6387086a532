from .metrics import (STANDARD_HORIZONS, HorizonMetrics, MetricsReport, report_horizons, horizon_slice,
                      masked_metrics, metrics_report, evaluate)
from .baseline import persistence_forecast, evaluate_persistence
from .heatmaps import HeatmapBundle, attention_heatmaps
from .ablation import AblationOutcome, AblationHarness, apply_ablation, relative_change, run_ablation


__all__ = [
    'STANDARD_HORIZONS',
    'HorizonMetrics',
    'MetricsReport',
    'report_horizons',
    'horizon_slice',
    'masked_metrics',
    'metrics_report',
    'evaluate',
    'persistence_forecast',
    'evaluate_persistence',
    'HeatmapBundle',
    'attention_heatmaps',
    'AblationOutcome',
    'AblationHarness',
    'apply_ablation',
    'relative_change',
    'run_ablation',
]
