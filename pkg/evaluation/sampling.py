"""
Target sampling with a human-like saccade amplitude mix.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from exceptions import Unreachable
from geometry.core import PixelPoint, back_project
from models import ExperimentConfig
from rig.simulator import MotorState, RigModel, TargetBoard

logger = logging.getLogger(__name__)

MAX_DIRECTION_ATTEMPTS = 100


@dataclass(frozen=True)
class TargetSample:
    world: np.ndarray
    pixel: PixelPoint
    eccentricity_deg: float
    direction_deg: float
    bucket: str


def bucket_label(lo: float, hi: float) -> str:
    return f"[{lo:g},{hi:g})"


def bucket_labels(edges: Sequence[float]) -> Tuple[str, ...]:
    return tuple(bucket_label(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))


def sample_eccentricity(rng: np.random.Generator, edges: Sequence[float],
                        probs: Sequence[float]) -> Tuple[float, str]:
    """Draw a bucket by its probability, then an eccentricity uniformly inside it."""
    b = int(rng.choice(len(probs), p=probs))
    lo, hi = edges[b], edges[b + 1]
    return float(rng.uniform(lo, hi)), bucket_label(lo, hi)


def target_pixel(rig: RigModel, eccentricity_deg: float, direction_deg: float) -> PixelPoint:
    """Pixel at the given angular offset from the image centre; direction 0 is rightward, 90 downward."""
    c = rig.intr.image_center
    r = math.tan(math.radians(eccentricity_deg))
    phi = math.radians(direction_deg)
    return PixelPoint(c.u + rig.intr.fx * r * math.cos(phi), c.v + rig.intr.fy * r * math.sin(phi))


def locate_target(rig: RigModel, actual: MotorState, board: TargetBoard, pixel: PixelPoint,
                  standoff_mm: float = 0.0):
    """World point seen at `pixel` from the actual pose, on the board plane (or its standoff plane)."""
    rot, centers = rig.camera_pose(actual.pan, actual.tilt)
    direction = rot[0].apply(back_project(rig.intr, pixel).as_array())
    return board.intersect(centers[0], direction, standoff_mm)


def sample_target(rng: np.random.Generator, rig: RigModel, actual: MotorState, board: TargetBoard,
                  exp: ExperimentConfig) -> TargetSample:
    """
    Place a fixation marker at a random eccentricity from the current view's centre.

    The direction is redrawn while the pixel falls outside the image or its ray
    misses the board plane.

    Args:
        rng: experiment random generator
        rig: rig kinematics
        actual: joint angles the current view was captured at
        board: board whose plane carries the marker
        exp: bucket edges, probabilities and standoff

    Returns:
        TargetSample
    """
    ecc, bucket = sample_eccentricity(rng, exp.bucket_edges_deg, exp.bucket_probs)
    for _ in range(MAX_DIRECTION_ATTEMPTS):
        direction = float(rng.uniform(0.0, 360.0))
        pixel = target_pixel(rig, ecc, direction)
        if not rig.intr.contains(pixel):
            continue
        world = locate_target(rig, actual, board, pixel, exp.target_standoff_mm)
        if world is None:
            continue
        return TargetSample(world, pixel, ecc, direction, bucket)
    raise Unreachable(f"No in-image direction for eccentricity {ecc:.2f} deg after {MAX_DIRECTION_ATTEMPTS} attempts")
