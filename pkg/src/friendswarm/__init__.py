"""Simulation and analysis of swarms with non-reciprocal pairwise preferences."""

from __future__ import annotations

__version__ = "0.1.0"

from .analysis import ClassifierThresholds, PatternKind, PatternLabel, classify, estimate_period, shape_drift
from .dynamics import IntegratorConfig, Method, SwarmState, net_velocity, pairwise_term, run, step
from .errors import (
    ConfigError,
    DegenerateStateError,
    DimensionError,
    InconsistentCommandError,
    NoEquilibriumError,
    SwarmError,
    TrajectoryError,
)
from .hardware import HardwareConfig, MotorCommand, SensorLayout, motor_outputs, motor_to_velocity, run_hardware
from .scenario import PreferenceMatrix, build_five_robot_matrix, build_general_matrix, named_scenario
from .trajectory import TrajectoryRecord, read_trajectory, write_trajectory

__all__ = [
    "ClassifierThresholds", "PatternKind", "PatternLabel", "classify", "estimate_period", "shape_drift",
    "IntegratorConfig", "Method", "SwarmState", "net_velocity", "pairwise_term", "run", "step",
    "ConfigError", "DegenerateStateError", "DimensionError", "InconsistentCommandError",
    "NoEquilibriumError", "SwarmError", "TrajectoryError",
    "HardwareConfig", "MotorCommand", "SensorLayout", "motor_outputs", "motor_to_velocity", "run_hardware",
    "PreferenceMatrix", "build_five_robot_matrix", "build_general_matrix", "named_scenario",
    "TrajectoryRecord", "read_trajectory", "write_trajectory",
]
