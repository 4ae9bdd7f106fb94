"""
Chained saccade experiment - each trial starts where the previous one ended.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from calibration.sweep import CalibrationSet, collect
from config import config_digest
from evaluation.sampling import sample_target
from evaluation.statistics import TrialSummary, summarize
from exceptions import EvaluationFailure, NoSuccessfulTrials, OutOfRange, TargetLost, Unreachable
from geometry.core import PixelPoint, pixel_to_degrees
from models import AppConfig
from rig.simulator import MotorState, RigModel, SimulatedRig, TargetBoard
from saccade.executor import Landing, execute
from saccade.planner import Mode, SaccadePlan, SaccadePlanner

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SaccadeTrial:
    trial_id: int
    start: MotorState
    eccentricity_deg: float
    direction_deg: float
    bucket: str
    target_pixel: PixelPoint
    target_deg: Tuple[float, float]
    plan: SaccadePlan
    landings: Tuple[Landing, ...]
    resamples: int = 0

    def __post_init__(self):
        if not self.landings:
            raise ValueError(f"Trial {self.trial_id} has no landings")

    @property
    def primary(self) -> Landing:
        return self.landings[0]

    @property
    def final(self) -> Landing:
        return self.landings[-1]


@dataclass(frozen=True)
class TrialFailure:
    trial_id: int
    start: MotorState
    reason: str


@dataclass
class ExperimentResult:
    trials: List[SaccadeTrial]
    failures: List[TrialFailure]
    calibration: CalibrationSet
    resamples: int = 0
    summary: Optional[TrialSummary] = field(default=None)


def derive_seeds(seed: int) -> Tuple[int, np.random.Generator]:
    """Calibration seed and experiment generator, both derived from one run seed."""
    cal_seq, exp_seq = np.random.SeedSequence(seed).spawn(2)
    return int(cal_seq.generate_state(1)[0]), np.random.default_rng(exp_seq)


def collect_calibration(config: AppConfig, seed: Optional[int] = None) -> CalibrationSet:
    """Run the calibration sweep on a fresh rig instance built from `config`."""
    cal_seed, _ = derive_seeds(config.seed if seed is None else seed)
    rig = SimulatedRig(RigModel.from_config(config.rig))
    cal = config.calibration
    return collect(
        rig, TargetBoard.from_config(config.board),
        cal.pan_range_deg, cal.tilt_range_deg, cal.step_deg,
        seed=cal_seed, digest=config_digest(config.rig, config.board),
    )


def home_state(cal: CalibrationSet) -> MotorState:
    """Grid point at the middle of the calibrated range."""
    return cal.motor_at(len(cal.pan_values) // 2, len(cal.tilt_values) // 2)


def run_experiment(config: AppConfig, calibration: Optional[CalibrationSet] = None,
                   seed: Optional[int] = None) -> ExperimentResult:
    """
    Run `config.experiment.trials` chained saccades.

    Targets whose plan would extrapolate beyond the calibrated mesh, or that
    cannot be planned at all, are redrawn; the redraws are counted. Trials that
    lose the target or leave the motor range are recorded as failures and the
    chain continues from the last commanded state.

    Args:
        config: validated configuration
        calibration: reuse this set instead of sweeping
        seed: overrides config.seed

    Returns:
        ExperimentResult with trials, failures and summary
    """
    seed = config.seed if seed is None else seed
    exp = config.experiment
    model = RigModel.from_config(config.rig)
    board = TargetBoard.from_config(config.board)
    cal = calibration if calibration is not None else collect_calibration(config, seed)
    _, rng = derive_seeds(seed)

    planner = SaccadePlanner(cal, interpolation=exp.interpolation,
                             warn_min_correspondences=exp.warn_min_correspondences)
    rig = SimulatedRig(model)
    start = home_state(cal)
    rig.move_to(start, history=MotorState(start.pan - cal.step, start.tilt - cal.step))

    trials: List[SaccadeTrial] = []
    failures: List[TrialFailure] = []
    total_resamples = 0
    logger.info(f"Running {exp.trials} chained trials (corrective={exp.corrective}, seed={seed})")

    for trial_id in range(exp.trials):
        current = rig.last_command

        plan = target = None
        reason = ''
        resamples = 0
        for _ in range(exp.max_resamples + 1):
            try:
                target = sample_target(rng, model, rig.actual, board, exp)
            except Unreachable as e:
                reason = str(e)
                resamples += 1
                continue
            obs = rig.capture(board, target.world, seed=int(rng.integers(0, 2**63 - 1)))
            if obs.target is None:
                reason = 'target not detected in the start view'
                resamples += 1
                continue
            try:
                candidate = planner.plan(current, obs.target, obs)
            except EvaluationFailure as e:
                reason = f"planning failed: {e}"
                resamples += 1
                continue
            if candidate.mode == Mode.EXTRAPOLATED:
                reason = 'target outside the calibrated mesh'
                resamples += 1
                continue
            plan = candidate
            break
        total_resamples += resamples

        if plan is None:
            logger.warning(f"✗ Trial {trial_id}: no plannable target after {resamples} draws ({reason})")
            failures.append(TrialFailure(trial_id, current, reason))
            continue

        try:
            execution = execute(rig, board, plan, target.world, planner,
                                corrective=exp.corrective, stop_deg=exp.corrective_stop_deg, rng=rng)
        except (TargetLost, OutOfRange) as e:
            logger.warning(f"✗ Trial {trial_id}: {e}")
            failures.append(TrialFailure(trial_id, current, str(e)))
            continue

        trials.append(SaccadeTrial(
            trial_id=trial_id,
            start=current,
            eccentricity_deg=target.eccentricity_deg,
            direction_deg=target.direction_deg,
            bucket=target.bucket,
            target_pixel=target.pixel,
            target_deg=pixel_to_degrees(model.intr, target.pixel),
            plan=plan,
            landings=tuple(execution.landings),
            resamples=resamples,
        ))

    logger.info(f"✓ {len(trials)} trials completed, {len(failures)} failed, {total_resamples} targets redrawn")
    result = ExperimentResult(trials, failures, cal, total_resamples)
    try:
        result.summary = summarize(trials)
    except NoSuccessfulTrials as e:
        logger.error(f"✗ {e}")
    return result
