"""
Tests for the command-line entry point and exit codes.
"""
import math

import pandas as pd
import pytest

import pipeline
from config import dump_app_config
from exceptions import AllSamplesDropped, ConfigError, NoValidCell
from models import AppConfig, BoardConfig, RigConfig


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    monkeypatch.setattr(pipeline, 'configure_logging', lambda *args, **kwargs: None)


@pytest.fixture
def ideal_yaml(tmp_path):
    path = tmp_path / 'ideal.yaml'
    dump_app_config(AppConfig(seed=11, rig=RigConfig.ideal()), path)
    return path


def test_exit_code_mapping():
    assert pipeline.exit_code_for(ConfigError('x')) == 2
    assert pipeline.exit_code_for(AllSamplesDropped('x')) == 3
    assert pipeline.exit_code_for(NoValidCell('x')) == 4


def test_calibrate_writes_calibration_file(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    assert pipeline.main(['--config', str(ideal_yaml), '--out', str(out), 'calibrate']) == 0
    lines = (out / 'calibration.jsonl').read_text(encoding='utf-8').splitlines()
    assert len(lines) == 1 + 63


def test_invalid_config_exits_2(tmp_path):
    path = tmp_path / 'bad.yaml'
    path.write_text('rig:\n  backlash_deg: -3\n', encoding='utf-8')
    assert pipeline.main(['--config', str(path), '--out', str(tmp_path), 'calibrate']) == 2


def test_missing_config_exits_2(tmp_path):
    assert pipeline.main(['--config', str(tmp_path / 'none.yaml'), 'calibrate']) == 2


def test_board_behind_camera_exits_3(tmp_path):
    path = tmp_path / 'behind.yaml'
    dump_app_config(AppConfig(rig=RigConfig.ideal(), board=BoardConfig(position_mm=[0.0, 0.0, -1000.0])), path)
    assert pipeline.main(['--config', str(path), '--out', str(tmp_path), 'calibrate']) == 3


def test_evaluate_writes_outputs(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    assert pipeline.main(['--config', str(ideal_yaml), '--out', str(out), '--trials', '5', 'evaluate']) == 0
    for name in ('trials.csv', 'summary.txt', 'scatter.csv'):
        assert (out / name).exists()
    assert 'status=ok' in (out / 'summary.txt').read_text(encoding='utf-8')


def test_evaluate_with_saved_calibration(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    assert pipeline.main(['--config', str(ideal_yaml), '--out', str(out), 'calibrate']) == 0
    code = pipeline.main(['--config', str(ideal_yaml), '--out', str(out), '--trials', '3', '--strict-digest',
                          'evaluate', '--calibration', str(out / 'calibration.jsonl')])
    assert code == 0


def test_saved_calibration_from_other_rig_is_refused(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    assert pipeline.main(['--config', str(ideal_yaml), '--out', str(out), 'calibrate']) == 0
    code = pipeline.main(['--out', str(out), '--trials', '3', '--strict-digest',
                          'evaluate', '--calibration', str(out / 'calibration.jsonl')])
    assert code == 2


def test_oracle_prints_command(capsys, ideal_yaml):
    assert pipeline.main(['--config', str(ideal_yaml), 'oracle', '--target', '176.3', '0', '1000']) == 0
    printed = dict(part.split('=') for part in capsys.readouterr().out.split())
    assert float(printed['pan']) == pytest.approx(math.degrees(math.atan2(176.3, 1000.0)), abs=0.01)
    assert float(printed['tilt']) == pytest.approx(0.0, abs=0.01)


def test_single_saccade(capsys, ideal_yaml):
    code = pipeline.main(['--config', str(ideal_yaml), '--corrective', '1',
                          'saccade', '--target-u', '600', '--target-v', '300'])
    assert code == 0
    out = capsys.readouterr().out
    assert 'case=A' in out
    assert 'pass 1:' in out


def test_ablate_writes_table(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    code = pipeline.main(['--config', str(ideal_yaml), '--out', str(out), '--trials', '3',
                          'ablate', '--steps', '10', '5'])
    assert code == 0
    table = pd.read_csv(out / 'ablation.csv')
    assert table['step_deg'].tolist() == [10.0, 5.0]
    assert table['samples'].tolist() == [5 * 4, 9 * 7]


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        pipeline.main(['frobnicate'])
    assert excinfo.value.code == 2


def test_undecodable_calibration_exits_2(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    assert pipeline.main(['--config', str(ideal_yaml), '--out', str(out), 'calibrate']) == 0
    path = out / 'calibration.jsonl'
    lines = path.read_bytes().split(b'\n')
    lines[3] = lines[3][:4] + b'\xff\xfe' + lines[3][6:]
    path.write_bytes(b'\n'.join(lines))
    code = pipeline.main(['--config', str(ideal_yaml), '--out', str(out), '--trials', '1',
                          'evaluate', '--calibration', str(path)])
    assert code == 2


def test_global_flags_after_subcommand(tmp_path, ideal_yaml):
    out = tmp_path / 'out'
    code = pipeline.main(['evaluate', '--config', str(ideal_yaml), '--out', str(out), '--trials', '2'])
    assert code == 0
    assert len(pd.read_csv(out / 'trials.csv')['trial_id'].unique()) <= 2


def test_global_flag_before_subcommand_survives():
    args = pipeline.build_parser().parse_args(['--trials', '4', '--strict-digest', 'calibrate'])
    assert args.trials == 4
    assert args.strict_digest is True
    args = pipeline.build_parser().parse_args(['calibrate', '--seed', '3'])
    assert args.seed == 3
    assert args.trials is None
    assert args.strict_digest is False
