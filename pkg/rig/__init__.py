"""
Rig package - simulated pan/tilt camera, calibration board and fixation oracle.
"""
from .oracle import oracle_fixate
from .simulator import (
    MotorState,
    Observation,
    RigModel,
    SimulatedRig,
    TargetBoard,
    imu_reading,
    quantize,
    render,
    set_motors,
    to_camera,
)

__all__ = [
    'MotorState', 'Observation', 'RigModel', 'SimulatedRig', 'TargetBoard',
    'imu_reading', 'oracle_fixate', 'quantize', 'render', 'set_motors', 'to_camera',
]
