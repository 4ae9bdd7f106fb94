"""
Validation models for configuration files and calibration records.
"""
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _tilted(base: Tuple[float, float, float], about: int, angle_deg: float) -> List[float]:
    """Rotate a unit axis by `angle_deg` about coordinate axis `about` (0=x, 1=y, 2=z)."""
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    x, y, z = base
    if about == 2:
        return [c * x - s * y, s * x + c * y, z]
    if about == 1:
        return [c * x + s * z, y, -s * x + c * z]
    return [x, c * y - s * z, s * y + c * z]


DEFAULT_MISALIGNMENT_DEG = 0.5


class IntrinsicsConfig(BaseModel):
    """Pinhole intrinsics; focal lengths default from the horizontal field of view."""

    model_config = ConfigDict(extra='forbid')

    width: int = 1024
    height: int = 768
    hfov_deg: float = 40.0
    fx: Optional[float] = None
    fy: Optional[float] = None
    cx: Optional[float] = None
    cy: Optional[float] = None

    @field_validator('width', 'height')
    @classmethod
    def size_positive(cls, v):
        if v <= 0:
            raise ValueError('Image size must be positive')
        return v

    @field_validator('hfov_deg')
    @classmethod
    def fov_in_range(cls, v):
        if not 0 < v < 180:
            raise ValueError('hfov_deg must lie in (0, 180)')
        return v

    @model_validator(mode='after')
    def fill_defaults(self):
        if self.fx is None:
            self.fx = (self.width / 2.0) / math.tan(math.radians(self.hfov_deg / 2.0))
        if self.fy is None:
            self.fy = self.fx
        if self.cx is None:
            self.cx = self.width / 2.0
        if self.cy is None:
            self.cy = self.height / 2.0
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError('Focal lengths must be positive')
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError('Principal point must lie inside the image')
        return self


class AxisConfig(BaseModel):
    """A joint axis: direction (normalized on load) through an offset point in mm."""

    model_config = ConfigDict(extra='forbid')

    direction: List[float] = Field(..., min_length=3, max_length=3)
    offset_mm: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)

    @field_validator('direction')
    @classmethod
    def unit_direction(cls, v):
        norm = math.sqrt(sum(c * c for c in v))
        if norm < 1e-12:
            raise ValueError('Axis direction cannot be the zero vector')
        return [c / norm for c in v]


def _default_pan_axis() -> AxisConfig:
    return AxisConfig(
        direction=_tilted((0.0, 1.0, 0.0), 2, DEFAULT_MISALIGNMENT_DEG),
        offset_mm=[0.0, 0.0, -20.0],
    )


def _default_tilt_axis() -> AxisConfig:
    return AxisConfig(
        direction=_tilted((1.0, 0.0, 0.0), 1, DEFAULT_MISALIGNMENT_DEG),
        offset_mm=[0.0, 0.0, -15.0],
    )


class RigConfig(BaseModel):
    """Simulated pan/tilt camera: kinematic imperfections, actuation and detection noise."""

    model_config = ConfigDict(extra='forbid')

    intrinsics: IntrinsicsConfig = Field(default_factory=IntrinsicsConfig)
    pan_axis: AxisConfig = Field(default_factory=_default_pan_axis)
    tilt_axis: AxisConfig = Field(default_factory=_default_tilt_axis)
    composition: Literal['tilt_then_pan', 'pan_then_tilt'] = 'tilt_then_pan'
    quantization_step_deg: float = 1.0
    backlash_deg: float = 0.2
    gain_pan: float = 1.02
    gain_tilt: float = 0.98
    corner_noise_sigma_px: float = 0.3
    target_noise_sigma_px: float = 0.0
    pan_limits_deg: Tuple[float, float] = (-46.0, 46.0)
    tilt_limits_deg: Tuple[float, float] = (-40.0, 40.0)

    @field_validator('quantization_step_deg', 'backlash_deg', 'corner_noise_sigma_px', 'target_noise_sigma_px')
    @classmethod
    def non_negative(cls, v):
        if v < 0:
            raise ValueError('Value cannot be negative')
        return v

    @field_validator('gain_pan', 'gain_tilt')
    @classmethod
    def gain_positive(cls, v):
        if v <= 0:
            raise ValueError('Linkage gain must be positive')
        return v

    @field_validator('pan_limits_deg', 'tilt_limits_deg')
    @classmethod
    def ordered_limits(cls, v):
        if v[0] >= v[1]:
            raise ValueError('Range limits must be (min, max) with min < max')
        return v

    @classmethod
    def ideal(cls) -> 'RigConfig':
        """All imperfections zeroed: pure rotation about the optical centre."""
        return cls(
            pan_axis=AxisConfig(direction=[0.0, 1.0, 0.0]),
            tilt_axis=AxisConfig(direction=[1.0, 0.0, 0.0]),
            quantization_step_deg=0.0,
            backlash_deg=0.0,
            gain_pan=1.0,
            gain_tilt=1.0,
            corner_noise_sigma_px=0.0,
        )

    @classmethod
    def quantized(cls, step_deg: float = 1.0) -> 'RigConfig':
        return cls.ideal().model_copy(update={'quantization_step_deg': step_deg})


class BoardConfig(BaseModel):
    """Planar calibration board; corner ids are row-major."""

    model_config = ConfigDict(extra='forbid')

    rows: int = 9
    cols: int = 14
    square_mm: float = 30.0
    position_mm: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1000.0], min_length=3, max_length=3)
    rotation_deg: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)

    @field_validator('rows', 'cols')
    @classmethod
    def at_least_two(cls, v):
        if v < 2:
            raise ValueError('Board needs at least 2 corners per side')
        return v

    @field_validator('square_mm')
    @classmethod
    def square_positive(cls, v):
        if v <= 0:
            raise ValueError('Square size must be positive')
        return v


class CalibrationConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    pan_range_deg: Tuple[float, float] = (-20.0, 20.0)
    tilt_range_deg: Tuple[float, float] = (-15.0, 15.0)
    step_deg: float = 5.0


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    trials: int = 191
    corrective: int = 1
    corrective_stop_deg: float = 0.0
    bucket_edges_deg: List[float] = Field(default_factory=lambda: [0.0, 6.0, 12.0, 18.0])
    bucket_probs: List[float] = Field(default_factory=lambda: [0.58, 0.33, 0.09])
    target_standoff_mm: float = 0.0
    interpolation: Literal['bilinear', 'nearest'] = 'bilinear'
    max_resamples: int = 100
    warn_min_correspondences: int = 10

    @field_validator('trials')
    @classmethod
    def trials_positive(cls, v):
        if v < 1:
            raise ValueError('Trial count must be at least 1')
        return v

    @field_validator('corrective', 'max_resamples')
    @classmethod
    def count_non_negative(cls, v):
        if v < 0:
            raise ValueError('Count cannot be negative')
        return v

    @model_validator(mode='after')
    def buckets_consistent(self):
        edges, probs = self.bucket_edges_deg, self.bucket_probs
        if len(edges) != len(probs) + 1:
            raise ValueError('Need one more bucket edge than bucket probabilities')
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError('Bucket edges must increase')
        if abs(sum(probs) - 1.0) > 1e-9 or any(p < 0 for p in probs):
            raise ValueError('Bucket probabilities must be non-negative and sum to 1')
        return self


class AppConfig(BaseModel):
    """Top-level structure of the YAML configuration file."""

    model_config = ConfigDict(extra='forbid')

    seed: int = 0
    rig: RigConfig = Field(default_factory=RigConfig)
    board: BoardConfig = Field(default_factory=BoardConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)


# Calibration file records (one JSON object per line)

CALIBRATION_FORMAT = 'dijit-calib/1'


class CalibrationHeaderRecord(BaseModel):
    model_config = ConfigDict(extra='forbid')

    format: Literal['dijit-calib/1']
    pan_values: List[float]
    tilt_values: List[float]
    step: float
    digest: str
    n_samples: int
    intrinsics: IntrinsicsConfig
    dropped: List[Tuple[float, float]] = Field(default_factory=list)

    @field_validator('pan_values', 'tilt_values')
    @classmethod
    def grid_not_empty(cls, v):
        if not v:
            raise ValueError('Grid axis cannot be empty')
        return v


class CalibrationSampleRecord(BaseModel):
    model_config = ConfigDict(extra='forbid')

    pan: float
    tilt: float
    imu: Tuple[float, float, float]
    corners: List[Tuple[int, float, float]]

    @field_validator('corners')
    @classmethod
    def corners_unique(cls, v):
        if not v:
            raise ValueError('Sample has no corners')
        ids = [c[0] for c in v]
        if len(set(ids)) != len(ids):
            raise ValueError('Duplicate corner ids')
        return v
