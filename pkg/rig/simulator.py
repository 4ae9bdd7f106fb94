"""
Simulated monocular pan/tilt camera rig with kinematic imperfections.

Frames: the rig (world) frame coincides with the camera frame at (0, 0):
x right, y down, z forward, millimetres. Positive pan turns the camera to the
right, positive tilt turns it up.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from exceptions import OutOfRange
from geometry.core import CameraIntrinsics, PixelPoint, project_many
from models import BoardConfig, RigConfig

logger = logging.getLogger(__name__)

RANGE_TOL = 1e-9


@dataclass(frozen=True)
class MotorState:
    pan: float
    tilt: float

    def as_tuple(self) -> Tuple[float, float]:
        return (self.pan, self.tilt)


@dataclass(frozen=True, eq=False)
class TargetBoard:
    """Planar corner grid; corner (r, c) has id r * cols + c."""

    rows: int
    cols: int
    square: float
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def from_config(cls, cfg: BoardConfig) -> 'TargetBoard':
        rot = Rotation.from_euler('xyz', cfg.rotation_deg, degrees=True).as_matrix()
        return cls(cfg.rows, cfg.cols, cfg.square_mm, rot, np.asarray(cfg.position_mm, dtype=float))

    @property
    def n_corners(self) -> int:
        return self.rows * self.cols

    def corners_world(self) -> np.ndarray:
        r, c = np.divmod(np.arange(self.n_corners), self.cols)
        local = np.column_stack([
            (c - (self.cols - 1) / 2.0) * self.square,
            (r - (self.rows - 1) / 2.0) * self.square,
            np.zeros(self.n_corners),
        ])
        return local @ self.rotation.T + self.translation

    @property
    def normal(self) -> np.ndarray:
        return self.rotation[:, 2]

    def intersect(self, origin: np.ndarray, direction: np.ndarray, standoff: float = 0.0) -> Optional[np.ndarray]:
        """
        Point where a world ray meets the board plane, or a parallel plane
        `standoff` mm closer to the ray origin. None when parallel or behind.
        """
        n = self.normal
        anchor = self.translation
        if standoff:
            side = math.copysign(1.0, float(np.dot(n, origin - self.translation)))
            anchor = anchor + side * standoff * n
        denom = float(np.dot(n, direction))
        if abs(denom) < 1e-12:
            return None
        s = float(np.dot(n, anchor - origin)) / denom
        if s <= 0:
            return None
        return origin + s * direction


@dataclass(frozen=True)
class Observation:
    """What one capture yields: detected corners, the fixation marker and the IMU reading."""

    corners: Tuple[Tuple[int, PixelPoint], ...]
    target: Optional[PixelPoint] = None
    imu: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def corner_map(self) -> Dict[int, PixelPoint]:
        return dict(self.corners)


@dataclass(frozen=True, eq=False)
class RigModel:
    intr: CameraIntrinsics
    pan_dir: np.ndarray
    pan_point: np.ndarray
    tilt_dir: np.ndarray
    tilt_point: np.ndarray
    quantization_step: float = 0.0
    backlash: float = 0.0
    gain_pan: float = 1.0
    gain_tilt: float = 1.0
    corner_noise_sigma: float = 0.0
    target_noise_sigma: float = 0.0
    pan_limits: Tuple[float, float] = (-46.0, 46.0)
    tilt_limits: Tuple[float, float] = (-40.0, 40.0)
    composition: str = 'tilt_then_pan'

    @classmethod
    def from_config(cls, cfg: RigConfig) -> 'RigModel':
        return cls(
            intr=CameraIntrinsics.from_config(cfg.intrinsics),
            pan_dir=np.asarray(cfg.pan_axis.direction, dtype=float),
            pan_point=np.asarray(cfg.pan_axis.offset_mm, dtype=float),
            tilt_dir=np.asarray(cfg.tilt_axis.direction, dtype=float),
            tilt_point=np.asarray(cfg.tilt_axis.offset_mm, dtype=float),
            quantization_step=cfg.quantization_step_deg,
            backlash=cfg.backlash_deg,
            gain_pan=cfg.gain_pan,
            gain_tilt=cfg.gain_tilt,
            corner_noise_sigma=cfg.corner_noise_sigma_px,
            target_noise_sigma=cfg.target_noise_sigma_px,
            pan_limits=tuple(cfg.pan_limits_deg),
            tilt_limits=tuple(cfg.tilt_limits_deg),
            composition=cfg.composition,
        )

    def without_actuation_error(self) -> 'RigModel':
        """Same geometry and gains, continuous backlash-free actuation."""
        return replace(self, quantization_step=0.0, backlash=0.0)

    def in_range(self, cmd: MotorState) -> bool:
        return (self.pan_limits[0] - RANGE_TOL <= cmd.pan <= self.pan_limits[1] + RANGE_TOL
                and self.tilt_limits[0] - RANGE_TOL <= cmd.tilt <= self.tilt_limits[1] + RANGE_TOL)

    def camera_pose(self, pan_deg, tilt_deg) -> Tuple[Rotation, np.ndarray]:
        """
        Camera-to-world rotation(s) and optical centre(s) for actual joint angles.

        Accepts scalars or equal-length arrays.
        """
        pan = np.radians(np.atleast_1d(np.asarray(pan_deg, dtype=float)))
        tilt = np.radians(np.atleast_1d(np.asarray(tilt_deg, dtype=float)))
        r_pan = Rotation.from_rotvec(pan[:, None] * self.pan_dir)
        r_tilt = Rotation.from_rotvec(tilt[:, None] * self.tilt_dir)

        def about(rot, point, x):
            return rot.apply(x - point) + point

        origin = np.zeros((len(pan), 3))
        if self.composition == 'tilt_then_pan':
            centers = about(r_pan, self.pan_point, about(r_tilt, self.tilt_point, origin))
            rot = r_pan * r_tilt
        else:
            centers = about(r_tilt, self.tilt_point, about(r_pan, self.pan_point, origin))
            rot = r_tilt * r_pan
        return rot, centers


def quantize(x: float, step: float) -> float:
    if step <= 0:
        return x
    return step * math.floor(x / step + 0.5)


def _direction(cmd: float, prev: Optional[float], fallback: int) -> int:
    if prev is None or cmd == prev:
        return fallback
    return 1 if cmd > prev else -1


def set_motors(rig: RigModel, cmd: MotorState, history: Optional[MotorState],
               direction: Tuple[int, int] = (1, 1)) -> Tuple[MotorState, Tuple[int, int]]:
    """
    Actual joint angles reached for a command.

    Per axis: quantize(cmd * gain) + sign * backlash / 2, where sign is the
    direction of travel from `history` (ascending is positive); a zero-length
    move keeps the previous `direction`.

    Returns:
        (actual state, travel direction per axis)
    """
    if not rig.in_range(cmd):
        raise OutOfRange(
            f"Command ({cmd.pan:.3f}, {cmd.tilt:.3f}) outside pan {rig.pan_limits} / tilt {rig.tilt_limits}"
        )
    d_pan = _direction(cmd.pan, history.pan if history else None, direction[0])
    d_tilt = _direction(cmd.tilt, history.tilt if history else None, direction[1])
    half = rig.backlash / 2.0
    actual = MotorState(
        quantize(cmd.pan * rig.gain_pan, rig.quantization_step) + d_pan * half,
        quantize(cmd.tilt * rig.gain_tilt, rig.quantization_step) + d_tilt * half,
    )
    return actual, (d_pan, d_tilt)


def imu_reading(rig: RigModel, actual: MotorState) -> Tuple[float, float, float]:
    """Exact camera orientation as (x, y, z) Euler degrees; y is pan-like, x tilt-like."""
    rot, _ = rig.camera_pose(actual.pan, actual.tilt)
    y, x, z = rot[0].as_euler('YXZ', degrees=True)
    return (float(x), float(y), float(z))


def to_camera(rig: RigModel, actual: MotorState, points_world: np.ndarray) -> np.ndarray:
    rot, centers = rig.camera_pose(actual.pan, actual.tilt)
    return rot[0].inv().apply(np.atleast_2d(points_world) - centers[0])


def render(rig: RigModel, actual: MotorState, board: TargetBoard,
           target_world: Optional[np.ndarray] = None, seed: Optional[int] = None,
           noisy_target: bool = True) -> Observation:
    """
    Simulate one capture at the given actual joint angles.

    Corner noise is drawn for every board corner before the visibility cut, so
    the draw does not depend on what is visible.
    """
    intr = rig.intr
    rng = np.random.default_rng(seed)

    pixels, in_front = project_many(intr, to_camera(rig, actual, board.corners_world()))
    if rig.corner_noise_sigma > 0:
        pixels = pixels + rng.normal(0.0, rig.corner_noise_sigma, size=pixels.shape)
    visible = (in_front & (pixels[:, 0] >= 0) & (pixels[:, 0] < intr.width)
               & (pixels[:, 1] >= 0) & (pixels[:, 1] < intr.height))
    corners = tuple(
        (int(i), PixelPoint(float(pixels[i, 0]), float(pixels[i, 1])))
        for i in np.flatnonzero(visible)
    )

    target = None
    if target_world is not None:
        tp, t_front = project_many(intr, to_camera(rig, actual, np.asarray(target_world, dtype=float)))
        if noisy_target and rig.target_noise_sigma > 0:
            tp = tp + rng.normal(0.0, rig.target_noise_sigma, size=tp.shape)
        candidate = PixelPoint(float(tp[0, 0]), float(tp[0, 1]))
        if t_front[0] and intr.contains(candidate):
            target = candidate

    return Observation(corners=corners, target=target, imu=imu_reading(rig, actual))


@dataclass
class SimulatedRig:
    """
    A rig instance with backlash history. Not shareable across concurrent trials.
    """

    model: RigModel
    last_command: Optional[MotorState] = None
    actual: Optional[MotorState] = None
    direction: Tuple[int, int] = (1, 1)
    moves: int = field(default=0)

    def move_to(self, cmd: MotorState, history: Optional[MotorState] = None) -> MotorState:
        """Command the motors; `history` overrides the approach reference (defaults to the last command)."""
        reference = history if history is not None else self.last_command
        actual, self.direction = set_motors(self.model, cmd, reference, self.direction)
        self.last_command = cmd
        self.actual = actual
        self.moves += 1
        logger.debug(f"Move #{self.moves}: cmd=({cmd.pan:.3f}, {cmd.tilt:.3f}) actual=({actual.pan:.3f}, {actual.tilt:.3f})")
        return actual

    def capture(self, board: TargetBoard, target_world: Optional[np.ndarray] = None,
                seed: Optional[int] = None) -> Observation:
        if self.actual is None:
            raise RuntimeError('Rig has not been commanded yet')
        return render(self.model, self.actual, board, target_world, seed)
