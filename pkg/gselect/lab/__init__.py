"""Data generators, replicated experiments and report files."""
from .experiments import (
    ApproxStudy,
    InfoConsistencyProfile,
    info_consistency_sweep,
    run_approx_study,
    run_experiment,
    run_info_consistency,
    run_model_false,
    run_nested,
    run_scheme,
    run_table1,
)
from .generators import TrueModelSpec, draw_replicate, draw_truth, generate_dataset
from .reports import build_manifest, config_hash, write_report

__all__ = [
    "TrueModelSpec",
    "draw_truth",
    "draw_replicate",
    "generate_dataset",
    "run_table1",
    "run_scheme",
    "run_nested",
    "run_model_false",
    "run_experiment",
    "run_info_consistency",
    "info_consistency_sweep",
    "run_approx_study",
    "InfoConsistencyProfile",
    "ApproxStudy",
    "build_manifest",
    "config_hash",
    "write_report",
]
