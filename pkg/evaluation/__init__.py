"""
Evaluation package - target sampling, chained experiments, statistics and export.
"""
from .experiment import (
    ExperimentResult,
    SaccadeTrial,
    TrialFailure,
    collect_calibration,
    derive_seeds,
    home_state,
    run_experiment,
)
from .export import export, read_trials, scatter_frame, summary_lines
from .sampling import TargetSample, bucket_labels, locate_target, sample_eccentricity, sample_target, target_pixel
from .statistics import (
    TrialSummary,
    acceptance_report,
    bucket_trend,
    corrective_comparison,
    summarize,
    summarize_frame,
    trials_frame,
)

__all__ = [
    'ExperimentResult', 'SaccadeTrial', 'TrialFailure', 'collect_calibration', 'derive_seeds',
    'home_state', 'run_experiment',
    'export', 'read_trials', 'scatter_frame', 'summary_lines',
    'TargetSample', 'bucket_labels', 'locate_target', 'sample_eccentricity', 'sample_target', 'target_pixel',
    'TrialSummary', 'acceptance_report', 'bucket_trend', 'corrective_comparison',
    'summarize', 'summarize_frame', 'trials_frame',
]
