"""
Projective primitives: pixel and homogeneous points, pinhole intrinsics,
back-projected rays and angular fixation error.

Pixel origin is the top-left corner, u grows rightward and v downward.
Angles are degrees at every public boundary.
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from exceptions import PointAtInfinity
from models import IntrinsicsConfig

W_EPS = 1e-12


@dataclass(frozen=True)
class PixelPoint:
    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)

    def homogeneous(self) -> 'HomogeneousPoint':
        return HomogeneousPoint(self.u, self.v, 1.0)

    def distance_to(self, other: 'PixelPoint') -> float:
        return math.hypot(self.u - other.u, self.v - other.v)


@dataclass(frozen=True)
class HomogeneousPoint:
    x: float
    y: float
    w: float

    def __post_init__(self):
        if self.x == 0 and self.y == 0 and self.w == 0:
            raise ValueError('Homogeneous point cannot be (0, 0, 0)')

    def to_pixel(self) -> PixelPoint:
        if abs(self.w) <= W_EPS:
            raise PointAtInfinity(f"w={self.w:.3e} is below {W_EPS}")
        return PixelPoint(self.x / self.w, self.y / self.w)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError('Focal lengths must be positive')
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError('Principal point must lie inside the image')

    @classmethod
    def from_config(cls, cfg: IntrinsicsConfig) -> 'CameraIntrinsics':
        return cls(cfg.fx, cfg.fy, cfg.cx, cfg.cy, cfg.width, cfg.height)

    @property
    def image_center(self) -> PixelPoint:
        """Fixation point of the method: the geometric centre of the image."""
        return PixelPoint(self.width / 2.0, self.height / 2.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    def contains(self, p: PixelPoint) -> bool:
        return 0.0 <= p.u < self.width and 0.0 <= p.v < self.height


@dataclass(frozen=True)
class Ray3:
    dx: float
    dy: float
    dz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz], dtype=float)


def back_project(intr: CameraIntrinsics, p: PixelPoint) -> Ray3:
    """Unit ray through pixel `p` in the camera frame (z forward)."""
    d = np.array([(p.u - intr.cx) / intr.fx, (p.v - intr.cy) / intr.fy, 1.0])
    d /= np.linalg.norm(d)
    return Ray3(float(d[0]), float(d[1]), float(d[2]))


def project(intr: CameraIntrinsics, point_cam: np.ndarray) -> PixelPoint:
    """Forward pinhole projection of a camera-frame point with z > 0."""
    x, y, z = point_cam
    if z <= 0:
        raise PointAtInfinity('Point is not in front of the camera')
    return PixelPoint(intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy)


def project_many(intr: CameraIntrinsics, points_cam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized projection.

    Args:
        intr: camera intrinsics
        points_cam: (..., 3) camera-frame points

    Returns:
        (pixels (..., 2), in_front mask (...))
    """
    z = points_cam[..., 2]
    in_front = z > 1e-9
    safe_z = np.where(in_front, z, 1.0)
    u = intr.fx * points_cam[..., 0] / safe_z + intr.cx
    v = intr.fy * points_cam[..., 1] / safe_z + intr.cy
    return np.stack([u, v], axis=-1), in_front


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    # atan2 form keeps precision near zero where arccos does not
    return math.degrees(math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b))))


def angular_error(intr: CameraIntrinsics, landing: PixelPoint) -> float:
    """Angle in degrees between the rays of `landing` and of the image centre."""
    return _angle_between(
        back_project(intr, landing).as_array(),
        back_project(intr, intr.image_center).as_array(),
    )


def axis_errors(intr: CameraIntrinsics, landing: PixelPoint) -> Tuple[float, float]:
    """
    Horizontal and vertical components of the fixation error, in degrees.

    The landing point is projected onto the image axes through the centre;
    right and down are positive.
    """
    c = intr.image_center
    h = angular_error(intr, PixelPoint(landing.u, c.v))
    v = angular_error(intr, PixelPoint(c.u, landing.v))
    return math.copysign(h, landing.u - c.u), math.copysign(v, landing.v - c.v)


def pixel_to_degrees(intr: CameraIntrinsics, p: PixelPoint) -> Tuple[float, float]:
    """Signed degree coordinates of a pixel relative to the image centre (plot axes)."""
    return axis_errors(intr, p)


def pixel_error_to_degrees(width: int, height: int, hfov_deg: float, vfov_deg: float,
                           pixels: float = 1.0) -> Tuple[float, float]:
    """
    Angular span of a pixel offset from the image centre.

    Used to put pixel-valued fixation errors reported elsewhere on the same
    scale as angular ones. Returns the (min, max) over the horizontal and
    vertical directions.
    """
    fx = (width / 2.0) / math.tan(math.radians(hfov_deg / 2.0))
    fy = (height / 2.0) / math.tan(math.radians(vfov_deg / 2.0))
    spans = [math.degrees(math.atan(pixels / f)) for f in (fx, fy)]
    return min(spans), max(spans)
