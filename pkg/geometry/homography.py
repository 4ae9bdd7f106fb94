"""
Planar homography estimation (normalized DLT) and image-centre transfer.

H maps a source image to a destination image: a ~ H b.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from exceptions import DegenerateConfiguration, InsufficientCorrespondences, PointAtInfinity
from geometry.core import W_EPS, CameraIntrinsics, PixelPoint

logger = logging.getLogger(__name__)

MIN_CORRESPONDENCES = 4
DEGENERACY_RATIO = 1e-8


@dataclass(frozen=True)
class Correspondence:
    id: int
    a: PixelPoint  # destination image
    b: PixelPoint  # source image


@dataclass(frozen=True, eq=False)
class Homography:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"Homography must be 3x3, got {m.shape}")
        m = m / np.linalg.norm(m)
        if abs(m[2, 2]) > 1e-9 and m[2, 2] < 0:
            m = -m
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateConfiguration('Homography is rank deficient')
        m.setflags(write=False)
        object.__setattr__(self, 'm', m)

    @classmethod
    def identity(cls) -> 'Homography':
        return cls(np.eye(3))

    def inverse(self) -> 'Homography':
        return Homography(np.linalg.inv(self.m))

    def __matmul__(self, other: 'Homography') -> 'Homography':
        return Homography(self.m @ other.m)


def _normalizing_transform(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin with mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    mean_dist = np.mean(np.linalg.norm(pts - centroid, axis=1))
    if mean_dist < 1e-12:
        raise DegenerateConfiguration('All points coincide')
    s = np.sqrt(2.0) / mean_dist
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def _apply_many(m: np.ndarray, pts: np.ndarray) -> np.ndarray:
    ph = np.column_stack([pts, np.ones(len(pts))]) @ m.T
    return ph[:, :2] / ph[:, 2:3]


def estimate_from_arrays(dst: np.ndarray, src: np.ndarray) -> Homography:
    """
    Normalized DLT on (N, 2) arrays of corresponding points.

    Args:
        dst: points a_j in the destination image
        src: points b_j in the source image

    Returns:
        Homography H with dst ~ H src
    """
    n = len(src)
    if n < MIN_CORRESPONDENCES:
        raise InsufficientCorrespondences(f"Need at least {MIN_CORRESPONDENCES} correspondences, got {n}")

    t_dst = _normalizing_transform(dst)
    t_src = _normalizing_transform(src)
    d = _apply_many(t_dst, dst)
    s = _apply_many(t_src, src)

    x, y = s[:, 0], s[:, 1]
    xp, yp = d[:, 0], d[:, 1]
    zeros, ones = np.zeros(n), np.ones(n)
    a = np.empty((2 * n, 9))
    a[0::2] = np.column_stack([-x, -y, -ones, zeros, zeros, zeros, xp * x, xp * y, xp])
    a[1::2] = np.column_stack([zeros, zeros, zeros, -x, -y, -ones, yp * x, yp * y, yp])

    _, sv, vt = np.linalg.svd(a)
    # with exactly four points the design matrix is 8x9 and the ninth value is an implicit zero
    padded = np.zeros(9)
    padded[:len(sv)] = sv
    if padded[0] <= 0 or padded[7] / padded[0] < DEGENERACY_RATIO:
        raise DegenerateConfiguration('Correspondences do not determine a unique homography')

    h_norm = vt[-1].reshape(3, 3)
    return Homography(np.linalg.inv(t_dst) @ h_norm @ t_src)


def _arrays(corrs: Sequence[Correspondence]) -> Tuple[np.ndarray, np.ndarray]:
    dst = np.array([[c.a.u, c.a.v] for c in corrs], dtype=float).reshape(-1, 2)
    src = np.array([[c.b.u, c.b.v] for c in corrs], dtype=float).reshape(-1, 2)
    return dst, src


def estimate(corrs: Sequence[Correspondence]) -> Homography:
    """Least-squares homography from the source image (b) to the destination image (a)."""
    dst, src = _arrays(corrs)
    return estimate_from_arrays(dst, src)


def apply(h: Homography, p: PixelPoint) -> PixelPoint:
    x, y, w = h.m @ np.array([p.u, p.v, 1.0])
    if abs(w) <= W_EPS:
        raise PointAtInfinity(f"Transferred point has w={w:.3e}")
    return PixelPoint(float(x / w), float(y / w))


def transfer_residuals(h: Homography, corrs: Sequence[Correspondence]) -> np.ndarray:
    """Per-correspondence distance |H b_j - a_j| in destination pixels."""
    dst, src = _arrays(corrs)
    return np.linalg.norm(_apply_many(h.m, src) - dst, axis=1)


def map_center(corrs: Sequence[Correspondence], intr: CameraIntrinsics) -> PixelPoint:
    """Centre of the source image expressed in destination image coordinates."""
    center = intr.image_center
    if corrs and all(c.a == c.b for c in corrs):
        return center
    return apply(estimate(corrs), center)


def correspondences(dst_corners: dict, src_corners: dict) -> List[Correspondence]:
    """Pair two {id: PixelPoint} detections on their shared ids, in id order."""
    shared = sorted(dst_corners.keys() & src_corners.keys())
    return [Correspondence(i, dst_corners[i], src_corners[i]) for i in shared]


if __name__ == "__main__":
    # Quick test
    logging.basicConfig(level=logging.INFO)
    rng = np.random.default_rng(0)
    truth = np.array([[1.01, 0.02, 12.0], [-0.01, 0.99, -7.0], [1e-5, -2e-5, 1.0]])
    src = rng.uniform(0, 1000, size=(20, 2))
    dst = _apply_many(truth, src)
    h = estimate_from_arrays(dst, src)
    print(f"Max residual: {np.abs(_apply_many(h.m, src) - dst).max():.2e} px")
