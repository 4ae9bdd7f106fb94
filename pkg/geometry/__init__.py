"""
Geometry package - pinhole primitives and planar homographies.
"""
from .core import (
    CameraIntrinsics,
    HomogeneousPoint,
    PixelPoint,
    Ray3,
    angular_error,
    axis_errors,
    back_project,
    pixel_error_to_degrees,
    pixel_to_degrees,
    project,
    project_many,
)
from .homography import Correspondence, Homography, apply, correspondences, estimate, map_center

__all__ = [
    'CameraIntrinsics', 'HomogeneousPoint', 'PixelPoint', 'Ray3',
    'angular_error', 'axis_errors', 'back_project', 'pixel_error_to_degrees',
    'pixel_to_degrees', 'project', 'project_many',
    'Correspondence', 'Homography', 'apply', 'correspondences', 'estimate', 'map_center',
]
