"""
Tests for target sampling, chained experiments, statistics and export.
"""
import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from evaluation import (
    bucket_labels,
    collect_calibration,
    corrective_comparison,
    export,
    read_trials,
    run_experiment,
    sample_eccentricity,
    sample_target,
    summarize,
    summarize_frame,
    target_pixel,
    trials_frame,
)
from evaluation.statistics import TRIAL_COLUMNS, mean_confidence_interval
from exceptions import NoSuccessfulTrials
from models import ExperimentConfig, RigConfig
from rig import MotorState


def parallax_rig() -> RigConfig:
    """Ideal rig on the default off-centre axes; with a standoff marker the primary
    saccade fixates the board point behind the marker."""
    return RigConfig.ideal().model_copy(update={'pan_axis': RigConfig().pan_axis, 'tilt_axis': RigConfig().tilt_axis})


def landing_rows(errors, buckets, final=None):
    """Per-landing table with primary errors and optional corrective errors."""
    rows = []
    for i, (err, bucket) in enumerate(zip(errors, buckets)):
        passes = [err] if final is None else [err, final[i]]
        for k, e in enumerate(passes):
            rows.append({
                'trial_id': i, 'start_pan': 0.0, 'start_tilt': 0.0, 'ecc_deg': 3.0, 'dir_deg': 0.0,
                'bucket': bucket, 'cmd_pan': 1.0, 'cmd_tilt': 1.0, 'mode': 'interior-bilinear',
                'case': 'B', 'landing_u': 512.0, 'landing_v': 384.0, 'err_deg': e,
                'err_h_deg': e * 0.6, 'err_v_deg': -e * 0.8, 'pass_index': k,
            })
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


@pytest.fixture(scope='module')
def ideal_run(config_for):
    return run_experiment(config_for(RigConfig.ideal(), trials=30, corrective=1))


class TestSampling:

    def test_bucket_frequencies(self):
        rng = np.random.default_rng(0)
        exp = ExperimentConfig()
        labels = [sample_eccentricity(rng, exp.bucket_edges_deg, exp.bucket_probs)[1] for _ in range(10_000)]
        counts = pd.Series(labels).value_counts(normalize=True)
        for label, expected in zip(bucket_labels(exp.bucket_edges_deg), exp.bucket_probs):
            assert abs(counts[label] - expected) < 0.02

    def test_eccentricity_inside_its_bucket(self):
        rng = np.random.default_rng(1)
        exp = ExperimentConfig()
        for _ in range(500):
            ecc, label = sample_eccentricity(rng, exp.bucket_edges_deg, exp.bucket_probs)
            lo, hi = (float(x) for x in label.strip('[)').split(','))
            assert lo <= ecc < hi

    def test_rightward_pixel_closed_form(self, ideal_rig):
        p = target_pixel(ideal_rig, 10.0, 0.0)
        intr = ideal_rig.intr
        assert p.u == pytest.approx(intr.cx + intr.fx * math.tan(math.radians(10.0)))
        assert p.v == pytest.approx(intr.cy)

    def test_zero_eccentricity_is_image_centre(self, ideal_rig):
        assert target_pixel(ideal_rig, 0.0, 123.0) == ideal_rig.intr.image_center

    def test_target_lies_on_board_plane(self, ideal_rig, board):
        rng = np.random.default_rng(2)
        sample = sample_target(rng, ideal_rig, MotorState(0.0, 0.0), board, ExperimentConfig())
        assert sample.world[2] == pytest.approx(1000.0)
        assert ideal_rig.intr.contains(sample.pixel)

    def test_standoff_moves_target_toward_camera(self, ideal_rig, board):
        rng = np.random.default_rng(2)
        sample = sample_target(rng, ideal_rig, MotorState(0.0, 0.0), board,
                               ExperimentConfig(target_standoff_mm=400.0))
        assert sample.world[2] == pytest.approx(600.0)


class TestSummary:

    def test_single_trial(self):
        summary = summarize_frame(landing_rows([1.0], ['[0,6)']))
        assert summary.n == 1
        assert summary.mean_primary == summary.median_primary == 1.0
        assert summary.frac_lt2_primary == 1.0
        assert summary.frac_lt1_primary == 0.0

    def test_bucket_means(self):
        summary = summarize_frame(landing_rows([0.5, 1.5], ['[0,6)', '[6,12)']))
        assert summary.bucket_means_primary == {'[0,6)': 0.5, '[6,12)': 1.5}
        assert summary.mean_primary == 1.0
        assert sum(summary.bucket_counts.values()) == summary.n

    def test_final_statistics_use_last_landing(self):
        summary = summarize_frame(landing_rows([1.2, 0.8], ['[0,6)', '[0,6)'], final=[0.4, 0.6]))
        assert summary.mean_primary == pytest.approx(1.0)
        assert summary.mean_final == pytest.approx(0.5)
        assert summary.frac_lt1_final == 1.0
        assert summary.bucket_means_final == {'[0,6)': pytest.approx(0.5)}

    def test_axis_statistics_are_absolute(self):
        summary = summarize_frame(landing_rows([1.0, 2.0], ['[0,6)', '[6,12)']))
        assert summary.mean_abs_h == pytest.approx(0.9)
        assert summary.mean_abs_v == pytest.approx(1.2)

    def test_no_trials(self):
        with pytest.raises(NoSuccessfulTrials):
            summarize([])
        with pytest.raises(NoSuccessfulTrials):
            summarize_frame(landing_rows([], []))

    def test_paired_comparison(self):
        rng = np.random.default_rng(4)
        primary = rng.uniform(0.5, 1.5, size=50)
        df = landing_rows(primary, ['[0,6)'] * 50, final=primary * 0.5)
        result = corrective_comparison(df)
        assert result['mean_improvement'] > 0
        assert result['p_value'] < 0.05


class TestExperiment:

    def test_chained_starts(self, ideal_run):
        trials = ideal_run.trials
        assert len(trials) + len(ideal_run.failures) == 30
        for prev, cur in zip(trials, trials[1:]):
            if cur.trial_id == prev.trial_id + 1:
                assert cur.start == prev.final.commanded

    def test_trials_have_primary_and_corrective(self, ideal_run):
        for trial in ideal_run.trials:
            assert [l.pass_index for l in trial.landings] == [0, 1]
            lo, hi = (float(x) for x in trial.bucket.strip('[)').split(','))
            assert lo <= trial.eccentricity_deg < hi

    def test_overall_mean_is_bucket_weighted(self, ideal_run):
        s = ideal_run.summary
        weighted = sum(s.bucket_counts[b] * s.bucket_means_primary[b] for b in s.bucket_counts) / s.n
        assert s.mean_primary == pytest.approx(weighted, rel=1e-12)
        assert 0.0 <= s.frac_lt1_primary <= 1.0

    def test_determinism(self, tmp_path, config_for, ideal_run):
        again = run_experiment(config_for(RigConfig.ideal(), trials=30, corrective=1))
        export(ideal_run.trials, ideal_run.summary, tmp_path / 'a')
        export(again.trials, again.summary, tmp_path / 'b')
        assert (tmp_path / 'a' / 'trials.csv').read_bytes() == (tmp_path / 'b' / 'trials.csv').read_bytes()

    def test_single_trial_near_centre(self, config_for):
        config = config_for(RigConfig.ideal(), trials=1, corrective=0,
                            bucket_edges_deg=[0.0, 0.001], bucket_probs=[1.0])
        result = run_experiment(config)
        trial = result.trials[0]
        assert trial.bucket == '[0,0.001)'
        assert trial.primary.err_deg < 1e-3


class TestExport:

    def test_row_count_and_reparse(self, tmp_path, ideal_run):
        paths = export(ideal_run.trials, ideal_run.summary, tmp_path)
        df = read_trials(paths['trials'])
        assert list(df.columns) == TRIAL_COLUMNS
        assert len(df) == 2 * len(ideal_run.trials)
        assert summarize_frame(df) == ideal_run.summary
        assert b'\r' not in paths['trials'].read_bytes()

    def test_summary_file_is_key_value(self, tmp_path, ideal_run):
        paths = export(ideal_run.trials, ideal_run.summary, tmp_path)
        lines = paths['summary'].read_text(encoding='utf-8').splitlines()
        assert all('=' in line for line in lines)
        record = dict(line.split('=', 1) for line in lines)
        assert record['status'] == 'ok'
        assert float(record['mean_primary']) == ideal_run.summary.mean_primary
        assert record['context.reference.median_h_v'] == '0.72 deg H / 0.41 deg V'

    def test_empty_export(self, tmp_path):
        paths = export([], None, tmp_path)
        assert paths['trials'].read_text(encoding='utf-8').strip() == ','.join(TRIAL_COLUMNS)
        assert 'status=NoSuccessfulTrials' in paths['summary'].read_text(encoding='utf-8')

    def test_ideal_scatter_lands_near_origin(self, tmp_path, ideal_run):
        paths = export(ideal_run.trials, ideal_run.summary, tmp_path)
        scatter = pd.read_csv(paths['scatter'])
        assert (scatter[['landing_x_deg', 'landing_y_deg']].abs() < 0.1).all().all()
        assert set(scatter['band']) == {'lt1'}
        primary = scatter[scatter['pass_index'] == 0]
        assert (np.hypot(primary['start_x_deg'], primary['start_y_deg']) < 19.0).all()


@pytest.mark.slow
def test_quantization_only_bounds(config_for):
    result = run_experiment(config_for(RigConfig.quantized(1.0), trials=500, corrective=0))
    errors = [t.primary.err_deg for t in result.trials]
    assert len(errors) >= 490
    assert np.mean(errors) <= 0.75
    assert max(errors) <= 1.0


@pytest.mark.slow
def test_default_rig_error_range(config_for):
    result = run_experiment(config_for(RigConfig(), trials=191, corrective=1))
    assert len(result.trials) + len(result.failures) == 191
    primary = [t.primary.err_deg for t in result.trials]
    lo, hi = mean_confidence_interval(primary)
    # 95% interval overlaps [0.5, 2.0]
    assert hi >= 0.5 and lo <= 2.0
    assert result.summary.mean_primary <= 2.0
    assert result.summary.frac_lt2_primary >= 0.9


@pytest.mark.slow
def test_corrective_pass_removes_parallax(config_for):
    result = run_experiment(config_for(parallax_rig(), trials=200, corrective=1, target_standoff_mm=400.0))
    df = trials_frame(result.trials)
    comparison = corrective_comparison(df)
    assert result.summary.mean_final < result.summary.mean_primary
    assert comparison['p_value'] < 0.05
    assert result.summary.frac_lt1_final >= result.summary.frac_lt1_primary


@pytest.mark.slow
def test_smaller_calibration_step_reduces_error(config_for):
    means = []
    for step in (10.0, 5.0, 2.5):
        config = config_for(RigConfig.ideal(), trials=150, corrective=0)
        config = config.model_copy(update={'calibration': config.calibration.model_copy(update={'step_deg': step})})
        means.append(run_experiment(config).summary.mean_primary)
    assert means[0] >= means[1] >= means[2]


@pytest.mark.slow
def test_error_grows_with_amplitude_across_seeds(config_for):
    base = config_for(parallax_rig(), trials=80, corrective=0, target_standoff_mm=400.0)
    calibration = collect_calibration(base)
    labels = bucket_labels(base.experiment.bucket_edges_deg)
    steps = {0: [], 1: []}
    for seed in range(10):
        means = run_experiment(base, calibration=calibration, seed=seed).summary.bucket_means_primary
        for k in steps:
            lower, upper = labels[k], labels[k + 1]
            if lower in means and upper in means:
                steps[k].append(means[upper] - means[lower])
    for diffs in steps.values():
        assert len(diffs) >= 8
        assert stats.ttest_1samp(diffs, 0.0, alternative='greater').pvalue < 0.05
