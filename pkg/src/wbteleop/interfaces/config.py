"""Parser tuning knobs and the configuration error type.

A single ``ParserConfig`` covers all device types; each parser reads only the
knobs that apply to it.  Values are per control tick where marked, otherwise
physical units.
"""
from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    """Bad configuration, detected at load/session start, never mid-session.

    Carries an optional source location so the CLI can point at the line.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        super().__init__(message)

    def __str__(self) -> str:
        msg = super().__str__()
        if self.path is not None and self.line is not None:
            return f"{self.path}:{self.line}: {msg}"
        if self.path is not None:
            return f"{self.path}: {msg}"
        return msg


@dataclass(frozen=True)
class ParserConfig:
    """Gains, thresholds and bindings for one device parser."""

    # arm delta gains: output delta = input motion × gain
    translation_gain: float = 1.0  # m per m (or m per tick per unit axis)
    rotation_gain: float = 1.0  # rad per rad (or rad per tick per unit axis)
    # base velocity gains
    base_linear_gain: float = 1.0  # m/s per unit input
    base_angular_gain: float = 1.0  # rad/s per unit input
    # torso rate: normalized height units per tick per unit input
    torso_gain: float = 0.02
    torso_initial: float = 0.0
    # inputs with magnitude below this contribute exactly zero
    deadband: float = 0.0
    # exponential smoothing factor for keypoint streams; 1 = raw passthrough
    smoothing: float = 0.6
    # keypoints below this confidence suppress their dependent fields
    confidence_threshold: float = 0.5
    # button bindings (device-specific meaning, see each parser)
    mode_button: int = 0
    gripper_button: int = 1
    left_clutch_button: int = 0
    right_clutch_button: int = 1
    engage_button: int | None = None
    engaged_by_default: bool = False
    # joystick/trigger axis bindings for tracked-hand devices
    base_axis_vx: int = 0
    base_axis_vy: int = 1
    base_axis_wz: int = 2
    torso_axis: int = 3
    left_trigger_axis: int = 4
    right_trigger_axis: int = 5
    # vision torso normalization bounds (hip-to-ankle-midpoint distance, m);
    # None until calibrated or configured
    torso_dist_min: float | None = None
    torso_dist_max: float | None = None
    # fraction of the standing hip height treated as the crouch floor when
    # calibration observes only the standing pose
    crouch_ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.smoothing <= 1.0:
            raise ConfigError(f"smoothing must be in [0,1], got {self.smoothing}")
        for name in ("translation_gain", "rotation_gain", "base_linear_gain",
                     "base_angular_gain", "torso_gain"):
            v = getattr(self, name)
            if v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.deadband < 0:
            raise ConfigError(f"deadband must be >= 0, got {self.deadband}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ConfigError(
                f"confidence_threshold must be in [0,1], got {self.confidence_threshold}"
            )
        if self.torso_dist_min is not None and self.torso_dist_max is not None:
            if not self.torso_dist_min < self.torso_dist_max:
                raise ConfigError(
                    f"torso distance bounds must satisfy min < max, got "
                    f"[{self.torso_dist_min}, {self.torso_dist_max}]"
                )
