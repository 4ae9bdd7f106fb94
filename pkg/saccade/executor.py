"""
Saccade execution - drives the rig to a plan, records where the target lands
and optionally re-plans corrective saccades from the new view.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from exceptions import EvaluationFailure, OutOfRange, TargetLost
from geometry.core import PixelPoint, angular_error, axis_errors
from rig.simulator import MotorState, Observation, SimulatedRig, TargetBoard
from saccade.planner import SaccadePlan, SaccadePlanner

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Landing:
    pass_index: int
    plan: SaccadePlan
    commanded: MotorState
    actual: MotorState
    pixel: PixelPoint
    err_deg: float
    err_h_deg: float
    err_v_deg: float


@dataclass(frozen=True)
class Execution:
    """Primary landing first, then one landing per corrective pass."""

    landings: List[Landing]
    final_obs: Observation

    @property
    def primary(self) -> Landing:
        return self.landings[0]

    @property
    def final(self) -> Landing:
        return self.landings[-1]


def _land(rig: SimulatedRig, board: TargetBoard, plan: SaccadePlan, target_world: np.ndarray,
          pass_index: int, seed: int) -> Tuple[Landing, Observation]:
    if not rig.model.in_range(plan.solved):
        raise OutOfRange(f"Planned state ({plan.solved.pan:.3f}, {plan.solved.tilt:.3f}) is outside the motor range")
    rig.move_to(plan.solved)
    obs = rig.capture(board, target_world, seed=seed)
    if obs.target is None:
        raise TargetLost(
            f"Target left the image after pass {pass_index} at ({plan.solved.pan:.3f}, {plan.solved.tilt:.3f})"
        )
    intr = rig.model.intr
    err_h, err_v = axis_errors(intr, obs.target)
    landing = Landing(
        pass_index=pass_index,
        plan=plan,
        commanded=plan.solved,
        actual=rig.actual,
        pixel=obs.target,
        err_deg=angular_error(intr, obs.target),
        err_h_deg=err_h,
        err_v_deg=err_v,
    )
    return landing, obs


def execute(rig: SimulatedRig, board: TargetBoard, plan: SaccadePlan, target_world: np.ndarray,
            planner: Optional[SaccadePlanner] = None, corrective: int = 0, stop_deg: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> Execution:
    """
    Execute a primary saccade and up to `corrective` follow-ups.

    Corrective passes re-detect the target in the new view and re-plan from the
    commanded state. They stop early once the error drops below `stop_deg`, or
    when re-planning fails; the landings so far are kept.

    Args:
        rig: rig instance (its backlash history is advanced)
        board: calibration board, also carries the fixation marker
        plan: primary plan
        target_world: fixation marker position, mm
        planner: planner for corrective passes
        corrective: number of corrective passes
        stop_deg: skip further passes once the error is below this
        rng: source of per-capture noise seeds

    Returns:
        Execution with one landing per motion
    """
    if corrective > 0 and planner is None:
        raise ValueError('Corrective passes need a planner')
    rng = rng or np.random.default_rng()

    landing, obs = _land(rig, board, plan, target_world, 0, int(rng.integers(0, 2**63 - 1)))
    landings = [landing]

    for pass_index in range(1, corrective + 1):
        if landing.err_deg < stop_deg:
            break
        try:
            replan = planner.plan(rig.last_command, obs.target, obs)
        except EvaluationFailure as e:
            logger.warning(f"✗ Corrective pass {pass_index} could not be planned: {e}")
            break
        landing, obs = _land(rig, board, replan, target_world, pass_index, int(rng.integers(0, 2**63 - 1)))
        landings.append(landing)

    logger.debug(
        f"Saccade: {len(landings)} motion(s), error {landings[0].err_deg:.3f} -> {landings[-1].err_deg:.3f} deg"
    )
    return Execution(landings=landings, final_obs=obs)
