"""
Trial tables and error statistics.

Everything is computed from the per-landing table produced by trials_frame(),
so a re-parsed CSV export yields the same summary as the in-memory trials.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence

import pandas as pd
from scipy import stats

from exceptions import NoSuccessfulTrials

logger = logging.getLogger(__name__)

TRIAL_COLUMNS = [
    'trial_id', 'start_pan', 'start_tilt', 'ecc_deg', 'dir_deg', 'bucket',
    'cmd_pan', 'cmd_tilt', 'mode', 'case', 'landing_u', 'landing_v',
    'err_deg', 'err_h_deg', 'err_v_deg', 'pass_index',
]

# Reported values for the hardware this method was developed on, kept for comparison
REFERENCE_MEAN_PRIMARY_DEG = 1.13
REFERENCE_MEAN_FINAL_DEG = 0.96
REFERENCE_BAND_DEG = (0.5, 2.0)


@dataclass
class TrialSummary:
    n: int
    mean_primary: float
    median_primary: float
    mean_final: float
    median_final: float
    bucket_counts: Dict[str, int] = field(default_factory=dict)
    bucket_means_primary: Dict[str, float] = field(default_factory=dict)
    bucket_means_final: Dict[str, float] = field(default_factory=dict)
    mean_abs_h: float = 0.0
    mean_abs_v: float = 0.0
    median_abs_h: float = 0.0
    median_abs_v: float = 0.0
    frac_lt1_primary: float = 0.0
    frac_lt2_primary: float = 0.0
    frac_lt1_final: float = 0.0
    frac_lt2_final: float = 0.0

    def to_dict(self) -> Dict:
        return asdict(self)


def _bucket_lower(label: str) -> float:
    return float(label.strip('[)').split(',')[0])


def trials_frame(trials: Sequence) -> pd.DataFrame:
    """One row per landing (primary and corrective), in trial then pass order."""
    rows = []
    for trial in trials:
        for landing in trial.landings:
            rows.append({
                'trial_id': trial.trial_id,
                'start_pan': trial.start.pan,
                'start_tilt': trial.start.tilt,
                'ecc_deg': trial.eccentricity_deg,
                'dir_deg': trial.direction_deg,
                'bucket': trial.bucket,
                'cmd_pan': landing.commanded.pan,
                'cmd_tilt': landing.commanded.tilt,
                'mode': landing.plan.mode.value,
                'case': landing.plan.case.value,
                'landing_u': landing.pixel.u,
                'landing_v': landing.pixel.v,
                'err_deg': landing.err_deg,
                'err_h_deg': landing.err_h_deg,
                'err_v_deg': landing.err_v_deg,
                'pass_index': landing.pass_index,
            })
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def primary_and_final(df: pd.DataFrame):
    ordered = df.sort_values(['trial_id', 'pass_index'], kind='mergesort')
    primary = ordered[ordered['pass_index'] == 0]
    final = ordered.groupby('trial_id', sort=True).tail(1)
    return primary, final


def summarize_frame(df: pd.DataFrame) -> TrialSummary:
    """
    Compute every summary statistic from a per-landing table.

    Bucket means and axis statistics use primary landings; the "final"
    statistics use the last landing of each trial.
    """
    if df.empty:
        raise NoSuccessfulTrials('No successful trials to summarize')
    primary, final = primary_and_final(df)

    labels = sorted(primary['bucket'].unique(), key=_bucket_lower)
    by_bucket_primary = primary.groupby('bucket')['err_deg']
    by_bucket_final = final.groupby('bucket')['err_deg']

    p_err, f_err = primary['err_deg'], final['err_deg']
    return TrialSummary(
        n=int(len(primary)),
        mean_primary=float(p_err.mean()),
        median_primary=float(p_err.median()),
        mean_final=float(f_err.mean()),
        median_final=float(f_err.median()),
        bucket_counts={b: int(by_bucket_primary.size()[b]) for b in labels},
        bucket_means_primary={b: float(by_bucket_primary.mean()[b]) for b in labels},
        bucket_means_final={b: float(by_bucket_final.mean()[b]) for b in labels},
        mean_abs_h=float(primary['err_h_deg'].abs().mean()),
        mean_abs_v=float(primary['err_v_deg'].abs().mean()),
        median_abs_h=float(primary['err_h_deg'].abs().median()),
        median_abs_v=float(primary['err_v_deg'].abs().median()),
        frac_lt1_primary=float((p_err < 1.0).mean()),
        frac_lt2_primary=float((p_err < 2.0).mean()),
        frac_lt1_final=float((f_err < 1.0).mean()),
        frac_lt2_final=float((f_err < 2.0).mean()),
    )


def summarize(trials: Sequence) -> TrialSummary:
    if not trials:
        raise NoSuccessfulTrials('No successful trials to summarize')
    return summarize_frame(trials_frame(trials))


# Acceptance report

def bucket_trend(summary: TrialSummary) -> bool:
    """True when mean primary error does not decrease with saccade amplitude."""
    means = list(summary.bucket_means_primary.values())
    return all(a <= b for a, b in zip(means, means[1:]))


def corrective_comparison(df: pd.DataFrame) -> Dict[str, float]:
    """
    One-sided paired t-test of primary against final error, per trial.

    Returns:
        dict with mean improvement, t statistic and p-value (NaN when there
        are fewer than two trials or no corrective passes)
    """
    primary, final = primary_and_final(df)
    p = primary.set_index('trial_id')['err_deg']
    f = final.set_index('trial_id')['err_deg'].reindex(p.index)
    improvement = float((p - f).mean()) if len(p) else math.nan
    if len(p) < 2 or (df['pass_index'] == 0).all():
        return {'mean_improvement': improvement, 't_statistic': math.nan, 'p_value': math.nan}
    result = stats.ttest_rel(p.to_numpy(), f.to_numpy(), alternative='greater')
    return {'mean_improvement': improvement, 't_statistic': float(result.statistic), 'p_value': float(result.pvalue)}


def mean_confidence_interval(values: Sequence[float], confidence: float = 0.95) -> tuple:
    values = pd.Series(values, dtype=float)
    if len(values) < 2:
        return (math.nan, math.nan)
    return tuple(float(x) for x in stats.t.interval(confidence, len(values) - 1,
                                                    loc=values.mean(), scale=stats.sem(values)))


def acceptance_report(df: pd.DataFrame, summary: TrialSummary) -> List[str]:
    """Human-readable acceptance lines for the log and the summary file."""
    lo, hi = REFERENCE_BAND_DEG
    comparison = corrective_comparison(df)
    primary, _ = primary_and_final(df)
    ci = mean_confidence_interval(primary['err_deg'])
    in_band = lo <= summary.mean_primary <= hi

    lines = [
        f"mean primary error {summary.mean_primary:.3f} deg (95% CI {ci[0]:.3f}-{ci[1]:.3f}), "
        f"reference {REFERENCE_MEAN_PRIMARY_DEG} deg, band [{lo}, {hi}]: {'✓' if in_band else '✗'}",
        f"bucket means non-decreasing with amplitude: {'✓' if bucket_trend(summary) else '✗'}",
    ]
    if not math.isnan(comparison['p_value']):
        better = comparison['p_value'] < 0.05 and comparison['mean_improvement'] > 0
        lines.append(
            f"corrective pass improvement {comparison['mean_improvement']:.3f} deg "
            f"(paired t={comparison['t_statistic']:.2f}, p={comparison['p_value']:.2e}): {'✓' if better else '✗'}"
        )
    return lines
