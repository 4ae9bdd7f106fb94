"""
Saccade package - centre-map planning, inverse bilinear interpolation and execution.
"""
from .bilinear import bilinear, inverse_bilinear, point_in_quad
from .executor import Execution, Landing, execute
from .planner import (
    Case,
    CenterMap,
    HomographyCache,
    Mode,
    SaccadePlan,
    SaccadePlanner,
    build_center_map,
    solve_case_a,
    solve_case_b,
)

__all__ = [
    'bilinear', 'inverse_bilinear', 'point_in_quad',
    'Execution', 'Landing', 'execute',
    'Case', 'CenterMap', 'HomographyCache', 'Mode', 'SaccadePlan', 'SaccadePlanner',
    'build_center_map', 'solve_case_a', 'solve_case_b',
]
