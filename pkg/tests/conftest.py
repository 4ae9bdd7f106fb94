"""
Shared fixtures: rig configs per preset and one cached calibration set per rig.
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from evaluation import collect_calibration  # noqa: E402
from models import AppConfig, RigConfig  # noqa: E402
from rig import RigModel, TargetBoard  # noqa: E402


def make_config(rig: RigConfig, **experiment) -> AppConfig:
    config = AppConfig(rig=rig, seed=7)
    if experiment:
        config = config.model_copy(update={'experiment': config.experiment.model_copy(update=experiment)})
    return config


@pytest.fixture(scope='session')
def config_for():
    """Factory: AppConfig for a rig with experiment overrides."""
    return make_config


@pytest.fixture(scope='session')
def ideal_config() -> AppConfig:
    return make_config(RigConfig.ideal())


@pytest.fixture(scope='session')
def quantized_config() -> AppConfig:
    return make_config(RigConfig.quantized(1.0))


@pytest.fixture(scope='session')
def default_config() -> AppConfig:
    return make_config(RigConfig())


@pytest.fixture(scope='session')
def ideal_rig(ideal_config) -> RigModel:
    return RigModel.from_config(ideal_config.rig)


@pytest.fixture(scope='session')
def default_rig(default_config) -> RigModel:
    return RigModel.from_config(default_config.rig)


@pytest.fixture(scope='session')
def board(ideal_config) -> TargetBoard:
    return TargetBoard.from_config(ideal_config.board)


@pytest.fixture(scope='session')
def ideal_calibration(ideal_config):
    return collect_calibration(ideal_config)


@pytest.fixture(scope='session')
def default_calibration(default_config):
    return collect_calibration(default_config)
