"""
Configuration management for the saccade control pipeline.

Process settings come from the environment (.env); rig, board, sweep and
experiment parameters come only from the YAML config file and CLI flags.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from exceptions import ConfigError
from models import AppConfig, BoardConfig, RigConfig

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

# Base paths
BASE_DIR = Path(__file__).parent
DATA_DIR = BASE_DIR / 'data'
LOGS_DIR = Path(os.getenv('LOGS_DIR', BASE_DIR / 'logs'))
OUTPUT_DIR = Path(os.getenv('OUTPUT_DIR', BASE_DIR / 'output'))

# Ensure directories exist
DATA_DIR.mkdir(exist_ok=True)
LOGS_DIR.mkdir(parents=True, exist_ok=True)

# Pipeline configuration
PIPELINE_CONFIG = {
    'log_level': os.getenv('LOG_LEVEL', 'INFO'),
    'log_format': os.getenv('LOG_FORMAT', 'text'),
}

# File names written by the CLI under --out
OUTPUT_FILES = {
    'calibration': 'calibration.jsonl',
    'trials': 'trials.csv',
    'summary': 'summary.txt',
    'scatter': 'scatter.csv',
    'ablation': 'ablation.csv',
}

RIG_PRESETS = {
    'default': RigConfig,
    'ideal': RigConfig.ideal,
    'quantized': RigConfig.quantized,
}


def _set_nested(data: Dict[str, Any], dotted_key: str, value: Any):
    node = data
    *parents, leaf = dotted_key.split('.')
    for key in parents:
        node = node.setdefault(key, {})
    node[leaf] = value


def load_app_config(path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> AppConfig:
    """
    Load and validate the YAML configuration.

    Args:
        path: YAML file; None means every default
        overrides: dotted keys (e.g. 'experiment.trials') applied after the file

    Returns:
        Validated AppConfig
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Could not parse {path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        logger.info(f"Loaded config from {path}")

    for key, value in (overrides or {}).items():
        if value is not None:
            _set_nested(raw, key, value)
            logger.debug(f"Override {key}={value}")

    try:
        return AppConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def dump_app_config(config: AppConfig, path: Union[str, Path]):
    """Write a config back out as YAML (used for presets and run records)."""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        yaml.safe_dump(config.model_dump(mode='json'), f, sort_keys=False)


def config_digest(rig: RigConfig, board: BoardConfig) -> str:
    """SHA-256 over the canonical JSON of the rig and board sections."""
    payload = {'rig': rig.model_dump(mode='json'), 'board': board.model_dump(mode='json')}
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
