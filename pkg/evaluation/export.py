"""
Result files: per-landing trial CSV, key=value summary and a scatter table
of target positions before and after each saccade, in degrees.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from config import OUTPUT_FILES
from evaluation.statistics import TRIAL_COLUMNS, TrialSummary, trials_frame
from exceptions import ExportIoError

logger = logging.getLogger(__name__)

SCATTER_COLUMNS = [
    'trial_id', 'pass_index', 'start_x_deg', 'start_y_deg',
    'landing_x_deg', 'landing_y_deg', 'err_deg', 'band',
]

# Static comparison rows; values as reported for each system, not recomputed here
LITERATURE_CONTEXT = [
    ('reference.mean_error', '1.13 deg'),
    ('reference.mean_error_corrective', '0.96 deg'),
    ('reference.median_h_v', '0.72 deg H / 0.41 deg V'),
    ('manfredi.mean_error', '1.57 deg'),
    ('van_opstal.mean_error', '1.47 deg'),
    ('icub.mean_error', '<1 deg'),
    ('cog.mean_error', '<1 px (0.93-1.52 deg at 120x120, 115.8x88.6 deg FOV)'),
    ('tombatossals.mean_error', '>5 px'),
    ('schenck.mean_error', '1 px'),
    ('human.amplitude_mix', '52% <6 deg, 33% 6-12 deg, 11% 12-18 deg, 4% >18 deg'),
    ('experiment.amplitude_mix', '58% <6 deg, 33% 6-12 deg, 9% 12-18 deg'),
]


def error_band(err_deg: float) -> str:
    if err_deg < 1.0:
        return 'lt1'
    if err_deg < 2.0:
        return '1to2'
    return 'ge2'


def scatter_frame(trials: Sequence) -> pd.DataFrame:
    rows = []
    for trial in trials:
        start = trial.target_deg
        for landing in trial.landings:
            rows.append({
                'trial_id': trial.trial_id,
                'pass_index': landing.pass_index,
                'start_x_deg': start[0],
                'start_y_deg': start[1],
                'landing_x_deg': landing.err_h_deg,
                'landing_y_deg': landing.err_v_deg,
                'err_deg': landing.err_deg,
                'band': error_band(landing.err_deg),
            })
            start = (landing.err_h_deg, landing.err_v_deg)
    return pd.DataFrame(rows, columns=SCATTER_COLUMNS)


def summary_lines(summary: Optional[TrialSummary], failures: int = 0, resamples: int = 0,
                  extra: Iterable[str] = ()) -> List[str]:
    """Line-oriented key=value record of a summary (or of its absence)."""
    lines = [f"failures={failures}", f"resamples={resamples}"]
    if summary is None:
        lines.append('status=NoSuccessfulTrials')
    else:
        lines.append('status=ok')
        for key, value in summary.to_dict().items():
            if isinstance(value, dict):
                for bucket, v in value.items():
                    lines.append(f"{key}.{bucket}={v!r}")
            else:
                lines.append(f"{key}={value!r}")
    for i, line in enumerate(extra):
        lines.append(f"acceptance.{i}={line}")
    lines.extend(f"context.{k}={v}" for k, v in LITERATURE_CONTEXT)
    return lines


def _write_csv(df: pd.DataFrame, path: Path):
    df.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')


def export(trials: Sequence, summary: Optional[TrialSummary], out_dir: Union[str, Path],
           failures: int = 0, resamples: int = 0, acceptance: Iterable[str] = ()) -> Dict[str, Path]:
    """
    Write trials.csv, summary.txt and scatter.csv into `out_dir`.

    An empty trial list still produces a header-only CSV and a summary that
    records NoSuccessfulTrials.

    Returns:
        {'trials': path, 'summary': path, 'scatter': path}
    """
    out_dir = Path(out_dir)
    paths = {name: out_dir / OUTPUT_FILES[name] for name in ('trials', 'summary', 'scatter')}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(trials_frame(trials), paths['trials'])
        _write_csv(scatter_frame(trials), paths['scatter'])
        with open(paths['summary'], 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(summary_lines(summary, failures, resamples, acceptance)) + '\n')
    except OSError as e:
        raise ExportIoError(f"Could not write results to {out_dir}: {e}") from e

    logger.info(f"✓ Exported {len(trials)} trials to {out_dir}")
    return paths


def read_trials(path: Union[str, Path]) -> pd.DataFrame:
    """Re-parse a trial CSV with exact float round-trip."""
    df = pd.read_csv(path, float_precision='round_trip',
                     dtype={'bucket': str, 'mode': str, 'case': str})
    return df[TRIAL_COLUMNS]
