from .audit import AuditReport, run_audit, write_outputs
from .config import PipelineConfig, config_from_dict, load_config
from .svg import render_histogram, render_r2_bars, render_rank_heatmap

__all__ = [
    "AuditReport",
    "PipelineConfig",
    "config_from_dict",
    "load_config",
    "render_histogram",
    "render_r2_bars",
    "render_rank_heatmap",
    "run_audit",
    "write_outputs",
]
