"""Experiment harness: profiles, run configs, the mode/scenario matrix, reports and the CLI."""
from .profiles import (
    PROFILE_COLUMNS, STRESS_KINDS, generate_profiles, load_profiles, write_profiles, apply_stress,
    frame_to_profiles, profiles_frame, synthetic_day, synthetic_tou,
)
from .config import (
    MODES, OUTPUT_ROOT_ENV, AttackConfig, EvaluationConfig, RunConfig, load_run_config, dump_run_config,
)
from .report import REPORT_COLUMNS, SERIES_COLUMNS, Report, emit
from .matrix import checkpoint_name, run_cell, run_matrix, robustness_series, train_checkpoint

__all__ = [
    'PROFILE_COLUMNS', 'STRESS_KINDS', 'generate_profiles', 'load_profiles', 'write_profiles', 'apply_stress',
    'frame_to_profiles', 'profiles_frame', 'synthetic_day', 'synthetic_tou',
    'MODES', 'OUTPUT_ROOT_ENV', 'AttackConfig', 'EvaluationConfig', 'RunConfig', 'load_run_config', 'dump_run_config',
    'REPORT_COLUMNS', 'SERIES_COLUMNS', 'Report', 'emit',
    'checkpoint_name', 'run_cell', 'run_matrix', 'robustness_series', 'train_checkpoint',
]
