"""
Calibration sweep - drives the rig over a uniform pan/tilt grid and records
board detections at every grid point.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from exceptions import AllSamplesDropped, EmptyGrid, OutOfRange
from geometry.core import CameraIntrinsics
from rig.simulator import MotorState, Observation, SimulatedRig, TargetBoard

logger = logging.getLogger(__name__)

GRID_TOL = 1e-9


@dataclass(frozen=True)
class CalibrationSample:
    motor: MotorState  # commanded, not actual
    obs: Observation


@dataclass(frozen=True)
class CalibrationSet:
    samples: Tuple[CalibrationSample, ...]
    pan_values: Tuple[float, ...]
    tilt_values: Tuple[float, ...]
    step: float
    digest: str
    intr: CameraIntrinsics
    dropped: Tuple[MotorState, ...] = field(default=())

    def __post_init__(self):
        for name, values in (('pan', self.pan_values), ('tilt', self.tilt_values)):
            if not values:
                raise EmptyGrid(f"No {name} grid values")
            gaps = np.diff(values)
            if len(gaps) and np.max(np.abs(gaps - self.step)) > GRID_TOL:
                raise ValueError(f"{name} grid spacing is not uniform at step {self.step}")
        self._index  # raises on off-grid or duplicate samples

    @cached_property
    def _index(self) -> Dict[Tuple[int, int], int]:
        index = {}
        for n, sample in enumerate(self.samples):
            key = self.index_of(sample.motor)
            if key is None:
                raise ValueError(f"Sample at {sample.motor} is not on the grid")
            if key in index:
                raise ValueError(f"Duplicate sample at {sample.motor}")
            index[key] = n
        return index

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.pan_values), len(self.tilt_values)

    def _axis_index(self, values: Tuple[float, ...], x: float) -> Optional[int]:
        i = int(round((x - values[0]) / self.step))
        if 0 <= i < len(values) and abs(values[i] - x) <= GRID_TOL:
            return i
        return None

    def index_of(self, motor: MotorState) -> Optional[Tuple[int, int]]:
        """Grid index of an exact grid state, else None."""
        i = self._axis_index(self.pan_values, motor.pan)
        j = self._axis_index(self.tilt_values, motor.tilt)
        if i is None or j is None:
            return None
        return i, j

    def sample_at(self, i: int, j: int) -> Optional[CalibrationSample]:
        n = self._index.get((i, j))
        return None if n is None else self.samples[n]

    def keys(self) -> List[Tuple[int, int]]:
        return sorted(self._index)

    def motor_at(self, i: int, j: int) -> MotorState:
        return MotorState(self.pan_values[i], self.tilt_values[j])

    def contains(self, motor: MotorState) -> bool:
        """True when the state lies in the calibration hull (grid bounding box)."""
        return (self.pan_values[0] - GRID_TOL <= motor.pan <= self.pan_values[-1] + GRID_TOL
                and self.tilt_values[0] - GRID_TOL <= motor.tilt <= self.tilt_values[-1] + GRID_TOL)

    def __iter__(self) -> Iterator[CalibrationSample]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)


def grid_values(lo: float, hi: float, step: float) -> Tuple[float, ...]:
    """Uniform grid lo, lo + step, ... up to hi inclusive."""
    if step <= 0 or hi < lo or not math.isfinite(step):
        raise EmptyGrid(f"No grid for range [{lo}, {hi}] with step {step}")
    n = int(math.floor((hi - lo) / step + GRID_TOL)) + 1
    return tuple(lo + i * step for i in range(n))


def collect(rig: SimulatedRig, board: TargetBoard, pan_range: Tuple[float, float],
            tilt_range: Tuple[float, float], step: float, seed: int, digest: str = '') -> CalibrationSet:
    """
    Sweep the grid in raster order (tilt outer, pan inner, both ascending).

    Every grid point is approached from below on both axes so the backlash
    state is the same for all samples.

    Args:
        rig: rig instance to drive
        board: calibration board
        pan_range, tilt_range: inclusive sweep bounds in degrees
        step: grid spacing in degrees
        seed: seeds the per-sample detection noise
        digest: checksum of the rig/board config used

    Returns:
        CalibrationSet with commanded motor values
    """
    pans = grid_values(*pan_range, step)
    tilts = grid_values(*tilt_range, step)
    for corner in ((pans[0], tilts[0]), (pans[-1], tilts[-1])):
        if not rig.model.in_range(MotorState(*corner)):
            raise OutOfRange(f"Sweep corner {corner} is outside the rig's motion range")

    logger.info(f"Calibration sweep: {len(pans)}x{len(tilts)} grid, step {step} deg")
    sample_seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=len(pans) * len(tilts))

    samples: List[CalibrationSample] = []
    dropped: List[MotorState] = []
    n = 0
    for tilt in tilts:
        for pan in pans:
            cmd = MotorState(pan, tilt)
            rig.move_to(cmd, history=MotorState(pan - step, tilt - step))
            obs = rig.capture(board, seed=int(sample_seeds[n]))
            n += 1
            if not obs.corners:
                logger.warning(f"✗ No corners visible at ({pan}, {tilt}) - sample dropped")
                dropped.append(cmd)
                continue
            samples.append(CalibrationSample(cmd, obs))

    if not samples:
        raise AllSamplesDropped('Board was not visible at any grid point')

    logger.info(f"✓ Collected {len(samples)} samples ({len(dropped)} dropped)")
    return CalibrationSet(
        samples=tuple(samples),
        pan_values=pans,
        tilt_values=tilts,
        step=step,
        digest=digest,
        intr=rig.model.intr,
        dropped=tuple(dropped),
    )
