"""
Saccade planner - maps a desired fixation pixel to pan/tilt commands.

For a calibration view s the centre of every other calibration image k is moved into
view s through the board homography between the two images. The transferred
centres form a warped copy of the motor grid in image space; the target pixel
is located in that mesh and its motor values are read off by inverse bilinear
interpolation (case A). Views that are not calibration images are handled by
solving in the four enclosing calibration images and blending the answers by
the current state's position in its motor-space cell (case B).
"""
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from calibration.sweep import CalibrationSet
from exceptions import (
    DegenerateConfiguration,
    InsufficientCorrespondences,
    NoValidCell,
    NoValidNeighbors,
    OutsideCalibrationHull,
    PointAtInfinity,
)
from geometry.core import PixelPoint
from geometry.homography import Homography, apply, correspondences, estimate
from rig.simulator import MotorState, Observation
from saccade.bilinear import inverse_bilinear, point_in_quad

logger = logging.getLogger(__name__)

GridIndex = Tuple[int, int]

MIN_CORRESPONDENCES = 4
WEIGHT_SNAP = 1e-9


class Mode(str, Enum):
    INTERIOR = 'interior-bilinear'
    EXTRAPOLATED = 'boundary-extrapolated'
    NEAREST = 'nearest-neighbor'


class Case(str, Enum):
    A = 'A'
    B = 'B'


@dataclass(frozen=True, eq=False)
class CenterMap:
    """Centres of all calibration images expressed in the frame of sample `s_index`; None marks an invalid entry."""

    s_index: GridIndex
    entries: Dict[GridIndex, Optional[PixelPoint]]

    def valid(self, key: GridIndex) -> bool:
        return self.entries.get(key) is not None

    def center(self, key: GridIndex) -> Optional[PixelPoint]:
        return self.entries.get(key)

    @property
    def n_valid(self) -> int:
        return sum(1 for c in self.entries.values() if c is not None)


@dataclass(frozen=True)
class SaccadePlan:
    target: PixelPoint
    solved: MotorState
    cell: Tuple[GridIndex, GridIndex, GridIndex, GridIndex]
    barycentric: Tuple[float, float]
    mode: Mode
    case: Case


class HomographyCache:
    """Lazily estimated board homographies k -> s keyed by grid indices; safe to share across threads."""

    def __init__(self, cal: CalibrationSet, min_correspondences: int = MIN_CORRESPONDENCES):
        self.cal = cal
        self.min_correspondences = max(MIN_CORRESPONDENCES, min_correspondences)
        self._table: Dict[Tuple[GridIndex, GridIndex], Optional[Homography]] = {}
        self._sizes: Dict[Tuple[GridIndex, GridIndex], int] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._table)

    def shared_count(self, k: GridIndex, s: GridIndex) -> int:
        self.get(k, s)
        return self._sizes[(k, s)]

    def get(self, k: GridIndex, s: GridIndex) -> Optional[Homography]:
        key = (k, s)
        with self._lock:
            if key in self._table:
                return self._table[key]

        corrs = correspondences(self.cal.sample_at(*s).obs.corner_map(), self.cal.sample_at(*k).obs.corner_map())
        h = None
        if len(corrs) >= self.min_correspondences:
            try:
                h = estimate(corrs)
            except (InsufficientCorrespondences, DegenerateConfiguration) as e:
                logger.debug(f"Homography {k} -> {s} rejected: {e}")

        with self._lock:
            self._table.setdefault(key, h)
            self._sizes.setdefault(key, len(corrs))
            return self._table[key]


def build_center_map(cal: CalibrationSet, s: GridIndex, cache: Optional[HomographyCache] = None,
                     warn_below: int = 10) -> CenterMap:
    """
    Transfer the centre of every calibration image into image s.

    Args:
        cal: calibration set
        s: grid index of the reference sample
        cache: shared homography memo (a private one is used when omitted)
        warn_below: log a warning for centres estimated from fewer correspondences

    Returns:
        CenterMap whose entry for s is the image centre
    """
    if cal.sample_at(*s) is None:
        raise NoValidNeighbors(f"No calibration sample at grid index {s}")
    cache = cache or HomographyCache(cal)
    center = cal.intr.image_center

    entries: Dict[GridIndex, Optional[PixelPoint]] = {}
    weak = 0
    for k in cal.keys():
        if k == s:
            entries[k] = center
            continue
        h = cache.get(k, s)
        if h is None:
            entries[k] = None
            continue
        try:
            entries[k] = apply(h, center)
        except PointAtInfinity:
            entries[k] = None
            continue
        if cache.shared_count(k, s) < warn_below:
            weak += 1

    cmap = CenterMap(s_index=s, entries=entries)
    if cmap.n_valid < 2:
        raise NoValidNeighbors(f"Sample {s} shares too few corners with every other calibration sample")
    if weak:
        logger.warning(f"{weak} centres in the map of {s} rest on fewer than {warn_below} correspondences")
    logger.debug(f"Centre map {s}: {cmap.n_valid}/{len(entries)} valid")
    return cmap


def _cells(cal: CalibrationSet, cmap: CenterMap) -> List[Tuple[GridIndex, ...]]:
    """Complete cells in (pan index, tilt index) order; vertices c00, c10, c01, c11."""
    n_pan, n_tilt = cal.shape
    cells = []
    for i in range(n_pan - 1):
        for j in range(n_tilt - 1):
            keys = ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1))
            if all(cmap.valid(k) for k in keys):
                cells.append(keys)
    return cells


def _quad(cmap: CenterMap, keys: Sequence[GridIndex]) -> np.ndarray:
    return np.array([cmap.center(k).as_array() for k in keys])


def _solved(cal: CalibrationSet, keys: Sequence[GridIndex], alpha: float, beta: float) -> MotorState:
    i, j = keys[0]
    return MotorState(cal.pan_values[i] + alpha * cal.step, cal.tilt_values[j] + beta * cal.step)


def _solve_nearest(cmap: CenterMap, cal: CalibrationSet, t: PixelPoint) -> SaccadePlan:
    valid = [(k, c) for k, c in cmap.entries.items() if c is not None]
    if not valid:
        raise NoValidCell('Centre map has no valid entries')
    k, _ = min(valid, key=lambda kc: (kc[1].distance_to(t), kc[0]))
    return SaccadePlan(t, cal.motor_at(*k), (k, k, k, k), (0.0, 0.0), Mode.NEAREST, Case.A)


def solve_case_a(cmap: CenterMap, cal: CalibrationSet, t: PixelPoint,
                 interpolation: str = 'bilinear') -> SaccadePlan:
    """
    Plan a saccade to pixel `t` of a calibration image.

    Walks the cells in (pan index, tilt index) order and takes the first whose
    transferred centres enclose t. When none does, the nearest valid centre
    picks the cell and the bilinear system is solved unclamped.

    Args:
        cmap: centre map of the view t lives in
        cal: calibration set the map was built from
        t: target pixel
        interpolation: 'bilinear' or 'nearest'

    Returns:
        SaccadePlan (case A)
    """
    if not (math.isfinite(t.u) and math.isfinite(t.v)):
        raise ValueError(f"Target pixel must be finite, got ({t.u}, {t.v})")
    if interpolation == 'nearest':
        return _solve_nearest(cmap, cal, t)

    cells = _cells(cal, cmap)
    if not cells:
        raise NoValidCell(f"No cell of the centre map {cmap.s_index} has four valid centres")

    target = t.as_array()
    for keys in cells:
        quad = _quad(cmap, keys)
        if point_in_quad(quad, target):
            alpha, beta = inverse_bilinear(quad, target)
            alpha = min(max(alpha, 0.0), 1.0)
            beta = min(max(beta, 0.0), 1.0)
            return SaccadePlan(t, _solved(cal, keys, alpha, beta), keys, (alpha, beta), Mode.INTERIOR, Case.A)

    # outside the mesh: nearest centre that belongs to a complete cell picks the cell
    in_cells = {k for keys in cells for k in keys}
    nearest = min(in_cells, key=lambda k: (cmap.center(k).distance_to(t), k))
    candidates = [keys for keys in cells if nearest in keys]
    keys = min(candidates, key=lambda ks: (float(np.linalg.norm(_quad(cmap, ks).mean(axis=0) - target)), ks))
    alpha, beta = inverse_bilinear(_quad(cmap, keys), target)
    logger.debug(f"Target ({t.u:.1f}, {t.v:.1f}) outside the centre mesh, extrapolating from cell {keys[0]}")
    return SaccadePlan(t, _solved(cal, keys, alpha, beta), keys, (alpha, beta), Mode.EXTRAPOLATED, Case.A)


def _cell_position(values: Sequence[float], step: float, x: float) -> Tuple[int, float]:
    """Lower grid index and fractional offset of x along one axis."""
    if len(values) == 1:
        return 0, 0.0
    a = (x - values[0]) / step
    i = min(max(int(math.floor(a)), 0), len(values) - 2)
    frac = a - i
    if abs(frac) < WEIGHT_SNAP:
        frac = 0.0
    elif abs(1.0 - frac) < WEIGHT_SNAP:
        frac = 1.0
    return i, frac


class SaccadePlanner:
    """
    Plans saccades against one calibration set.

    Holds the homography memo and the centre maps built so far, so repeated
    plans from nearby states reuse earlier estimates.
    """

    def __init__(self, cal: CalibrationSet, interpolation: str = 'bilinear', warn_min_correspondences: int = 10):
        self.cal = cal
        self.interpolation = interpolation
        self.warn_min_correspondences = warn_min_correspondences
        self.cache = HomographyCache(cal)
        self._maps: Dict[GridIndex, CenterMap] = {}
        self._lock = threading.Lock()

    def center_map(self, s: GridIndex) -> CenterMap:
        with self._lock:
            cmap = self._maps.get(s)
        if cmap is None:
            cmap = build_center_map(self.cal, s, self.cache, self.warn_min_correspondences)
            with self._lock:
                cmap = self._maps.setdefault(s, cmap)
        return cmap

    def plan_in_sample(self, s: GridIndex, t: PixelPoint) -> SaccadePlan:
        """Case A: `t` is a pixel of calibration image s."""
        return solve_case_a(self.center_map(s), self.cal, t, self.interpolation)

    def plan(self, current: MotorState, t: PixelPoint, current_obs: Observation) -> SaccadePlan:
        """Plan from any in-hull commanded state; exact grid states reduce to case A."""
        return solve_case_b(self.cal, current, t, current_obs, self)


def solve_case_b(cal: CalibrationSet, current: MotorState, t: PixelPoint, current_obs: Observation,
                 planner: Optional[SaccadePlanner] = None) -> SaccadePlan:
    """
    Plan a saccade from a view that is not a calibration image.

    `t` is moved into each of the four calibration images enclosing `current`
    in motor space, solved there, and the four motor answers are blended with
    the bilinear weights of `current` inside its cell. Zero-weight corners are
    skipped, so a state on the grid reproduces the case-A answer.

    Args:
        cal: calibration set
        current: commanded state the view was captured at
        t: target pixel in the current view
        current_obs: corners detected in the current view
        planner: planner whose memo to use (a private one when omitted)

    Returns:
        SaccadePlan; case B unless `current` is a grid point
    """
    if not cal.contains(current):
        raise OutsideCalibrationHull(
            f"State ({current.pan:.3f}, {current.tilt:.3f}) lies outside the calibrated range "
            f"pan [{cal.pan_values[0]}, {cal.pan_values[-1]}] tilt [{cal.tilt_values[0]}, {cal.tilt_values[-1]}]"
        )
    planner = planner or SaccadePlanner(cal)

    i0, a = _cell_position(cal.pan_values, cal.step, current.pan)
    j0, b = _cell_position(cal.tilt_values, cal.step, current.tilt)
    weighted = [
        ((i0, j0), (1 - a) * (1 - b)),
        ((i0 + 1, j0), a * (1 - b)),
        ((i0, j0 + 1), (1 - a) * b),
        ((i0 + 1, j0 + 1), a * b),
    ]
    weighted = [(k, w) for k, w in weighted if w > 0.0]

    current_corners = current_obs.corner_map()
    parts: List[Tuple[SaccadePlan, float]] = []
    for k, w in weighted:
        sample = cal.sample_at(*k)
        if sample is None:
            raise NoValidNeighbors(f"Enclosing calibration sample {k} was dropped")
        corrs = correspondences(sample.obs.corner_map(), current_corners)
        if len(corrs) < MIN_CORRESPONDENCES:
            raise InsufficientCorrespondences(
                f"Current view shares {len(corrs)} corners with sample {k}, need {MIN_CORRESPONDENCES}"
            )
        t_k = apply(estimate(corrs), t)
        parts.append((planner.plan_in_sample(k, t_k), w))

    if len(parts) == 1:
        plan = parts[0][0]
        return SaccadePlan(t, plan.solved, plan.cell, plan.barycentric, plan.mode, Case.A)

    pan = sum(w * p.solved.pan for p, w in parts)
    tilt = sum(w * p.solved.tilt for p, w in parts)
    dominant = max(parts, key=lambda pw: pw[1])[0]
    modes = {p.mode for p, _ in parts}
    mode = Mode.EXTRAPOLATED if Mode.EXTRAPOLATED in modes else dominant.mode
    return SaccadePlan(t, MotorState(pan, tilt), dominant.cell, dominant.barycentric, mode, Case.B)
