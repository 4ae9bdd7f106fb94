"""
Brute-force fixation oracle used to validate the saccade planner.

Searches commanded motor space on the rig's true kinematics with continuous,
backlash-free actuation, so the answer is the command that would fixate the
target if the motors could realise it exactly.
"""
import logging
from typing import Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from exceptions import TargetUnreachable
from geometry.core import back_project, project_many
from rig.simulator import MotorState, RigModel

logger = logging.getLogger(__name__)

REFINE_ROUNDS = 4


def _fixation_errors(rig: RigModel, target_world: np.ndarray,
                     cmd_pan: np.ndarray, cmd_tilt: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Angular error (deg) and in-bounds mask of the target for each commanded state."""
    rot, centers = rig.camera_pose(cmd_pan * rig.gain_pan, cmd_tilt * rig.gain_tilt)
    cam = rot.inv().apply(target_world - centers)
    pixels, in_front = project_many(rig.intr, cam)
    visible = (in_front & (pixels[:, 0] >= 0) & (pixels[:, 0] < rig.intr.width)
               & (pixels[:, 1] >= 0) & (pixels[:, 1] < rig.intr.height))
    axis = back_project(rig.intr, rig.intr.image_center).as_array()
    unit = cam / np.linalg.norm(cam, axis=1, keepdims=True)
    cross = np.linalg.norm(np.cross(unit, axis), axis=1)
    errors = np.degrees(np.arctan2(cross, unit @ axis))
    return errors, visible


def oracle_fixate(rig: RigModel, target_world, resolution: float = 0.5,
                  xatol: float = 1e-6) -> MotorState:
    """
    Command that brings `target_world` to the image centre.

    Exhaustive grid at `resolution` degrees over the motor range, then
    alternating per-axis bounded golden-section (Brent) refinement within
    one grid cell.

    Args:
        rig: rig kinematics (noise, quantization and backlash are ignored)
        target_world: 3-vector in the rig frame, mm
        resolution: grid spacing in degrees
        xatol: refinement tolerance in degrees

    Returns:
        Commanded MotorState
    """
    target = np.asarray(target_world, dtype=float)
    pans = np.arange(rig.pan_limits[0], rig.pan_limits[1] + 1e-9, resolution)
    tilts = np.arange(rig.tilt_limits[0], rig.tilt_limits[1] + 1e-9, resolution)
    grid_pan, grid_tilt = np.meshgrid(pans, tilts, indexing='ij')
    errors, visible = _fixation_errors(rig, target, grid_pan.ravel(), grid_tilt.ravel())
    if not visible.any():
        raise TargetUnreachable(f"Target {target.tolist()} is not visible from any reachable state")

    errors = np.where(visible, errors, np.inf)
    best = int(np.argmin(errors))
    pan, tilt = float(grid_pan.ravel()[best]), float(grid_tilt.ravel()[best])
    logger.debug(f"Oracle grid minimum ({pan:.2f}, {tilt:.2f}) err={errors[best]:.4f} deg")

    def objective(p, t):
        err, _ = _fixation_errors(rig, target, np.array([p]), np.array([t]))
        return float(err[0])

    for _ in range(REFINE_ROUNDS):
        lo, hi = max(pan - resolution, rig.pan_limits[0]), min(pan + resolution, rig.pan_limits[1])
        pan = float(minimize_scalar(lambda p: objective(p, tilt), bounds=(lo, hi),
                                    method='bounded', options={'xatol': xatol}).x)
        lo, hi = max(tilt - resolution, rig.tilt_limits[0]), min(tilt + resolution, rig.tilt_limits[1])
        tilt = float(minimize_scalar(lambda t: objective(pan, t), bounds=(lo, hi),
                                     method='bounded', options={'xatol': xatol}).x)

    return MotorState(pan, tilt)
