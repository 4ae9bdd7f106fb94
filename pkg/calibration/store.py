"""
Calibration set persistence - one JSON record per line.

Line 1 is the header (format, grid, step, digest, intrinsics, sample count);
every further line is one sample {pan, tilt, imu, corners: [[id, u, v], ...]}.
Floats are written with their shortest round-trip repr, so load(save(x)) == x.
"""
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from calibration.sweep import CalibrationSample, CalibrationSet
from exceptions import CalibrationIoError, CalibrationParseError, DigestMismatch
from geometry.core import CameraIntrinsics, PixelPoint
from models import CALIBRATION_FORMAT, CalibrationHeaderRecord, CalibrationSampleRecord
from rig.simulator import MotorState, Observation

logger = logging.getLogger(__name__)


def _header(cal: CalibrationSet) -> dict:
    intr = cal.intr
    return {
        'format': CALIBRATION_FORMAT,
        'pan_values': list(cal.pan_values),
        'tilt_values': list(cal.tilt_values),
        'step': cal.step,
        'digest': cal.digest,
        'n_samples': len(cal.samples),
        'intrinsics': {
            'width': intr.width, 'height': intr.height,
            'fx': intr.fx, 'fy': intr.fy, 'cx': intr.cx, 'cy': intr.cy,
        },
        'dropped': [[m.pan, m.tilt] for m in cal.dropped],
    }


def _sample(sample: CalibrationSample) -> dict:
    return {
        'pan': sample.motor.pan,
        'tilt': sample.motor.tilt,
        'imu': list(sample.obs.imu),
        'corners': [[i, p.u, p.v] for i, p in sample.obs.corners],
    }


def save(cal: CalibrationSet, path: Union[str, Path]):
    """Write a calibration set as UTF-8 JSON lines with LF endings."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(json.dumps(_header(cal)) + '\n')
            for sample in cal.samples:
                f.write(json.dumps(_sample(sample)) + '\n')
    except OSError as e:
        raise CalibrationIoError(f"Could not write {path}: {e}") from e
    logger.info(f"✓ Saved {len(cal.samples)} calibration samples to {path}")


def load(path: Union[str, Path], expected_digest: Optional[str] = None, strict: bool = False) -> CalibrationSet:
    """
    Read a calibration set, validating every record.

    Args:
        path: file written by save()
        expected_digest: digest of the current rig/board config
        strict: raise DigestMismatch when the stored digest differs

    Returns:
        CalibrationSet equal field-for-field to the one saved
    """
    path = Path(path)
    try:
        raw_lines = path.read_bytes().split(b'\n')
    except OSError as e:
        raise CalibrationIoError(f"Could not read {path}: {e}") from e

    lines: List[str] = []
    for line_no, raw in enumerate(raw_lines, start=1):
        try:
            lines.append(raw.decode('utf-8'))
        except UnicodeDecodeError as e:
            raise CalibrationParseError(line_no, f"not valid UTF-8 at byte {e.start}") from e

    if lines and lines[-1] == '':
        lines.pop()
    if not lines:
        raise CalibrationParseError(1, 'missing header record')

    try:
        header = CalibrationHeaderRecord.model_validate_json(lines[0])
    except ValidationError as e:
        raise CalibrationParseError(1, f"invalid header: {e.errors()[0]['msg']}") from e

    if strict and expected_digest is not None and header.digest != expected_digest:
        raise DigestMismatch(expected_digest, header.digest)
    if expected_digest is not None and header.digest != expected_digest:
        logger.warning(f"Calibration {path} was collected with a different rig/board config")

    try:
        grid = CalibrationSet(
            samples=(),
            pan_values=tuple(header.pan_values),
            tilt_values=tuple(header.tilt_values),
            step=header.step,
            digest=header.digest,
            intr=CameraIntrinsics.from_config(header.intrinsics),
            dropped=tuple(MotorState(p, t) for p, t in header.dropped),
        )
    except ValueError as e:
        raise CalibrationParseError(1, f"invalid header: {e}") from e

    samples: List[CalibrationSample] = []
    seen: Dict[Tuple[int, int], int] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            rec = CalibrationSampleRecord.model_validate_json(line)
        except ValidationError as e:
            raise CalibrationParseError(line_no, f"invalid sample: {e.errors()[0]['msg']}") from e
        motor = MotorState(rec.pan, rec.tilt)
        key = grid.index_of(motor)
        if key is None:
            raise CalibrationParseError(line_no, f"sample ({rec.pan}, {rec.tilt}) is not on the header grid")
        if key in seen:
            raise CalibrationParseError(
                line_no, f"duplicate sample ({rec.pan}, {rec.tilt}), first recorded at line {seen[key]}"
            )
        seen[key] = line_no
        samples.append(CalibrationSample(
            motor=motor,
            obs=Observation(
                corners=tuple((cid, PixelPoint(u, v)) for cid, u, v in rec.corners),
                target=None,
                imu=tuple(rec.imu),
            ),
        ))

    if len(samples) != header.n_samples:
        raise CalibrationParseError(
            len(lines) + 1, f"expected {header.n_samples} sample records, found {len(samples)} (truncated file?)"
        )

    cal = replace(grid, samples=tuple(samples))
    logger.info(f"✓ Loaded {len(samples)} calibration samples from {path}")
    return cal
