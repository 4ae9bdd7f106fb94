"""
Calibration package - grid sweep over pan/tilt space and its persistence.
"""
from .store import load, save
from .sweep import CalibrationSample, CalibrationSet, collect, grid_values

__all__ = ['CalibrationSample', 'CalibrationSet', 'collect', 'grid_values', 'load', 'save']
