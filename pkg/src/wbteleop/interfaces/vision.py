"""Body-keypoint parser: maps tracked human motion onto robot commands.

Input is a stream of pre-extracted keypoints in the capture (camera) frame,
right-handed, operator facing the camera: +x image-right, +y image-down,
+z optical axis toward the operator.  The operator-to-robot axis convention
is fixed here and documented once:

    operator forward (toward camera, -z)  -> robot +x
    operator left (+x, mirrored view)     -> robot +y
    operator up (-y)                      -> robot +z
    hip_yaw: radians about the vertical, positive = turning left -> robot +wz

Field mappings:

* base: per-frame displacement of the smoothed hip center, divided by the
  frame period and scaled, gives (vx, vy); hip yaw rate gives wz
* torso: hip-to-ankle-midpoint distance normalized by the calibrated
  [min, max] range, clamped to [0, 1]
* arms: per-frame delta of the palm pose expressed in the hip frame, axes
  remapped to the robot convention above, scaled by the arm gains

Keypoints below the confidence threshold suppress their dependent fields for
that frame and re-anchor the affected history (no velocity spikes when
tracking returns).  Base and torso require calibration of the standing pose;
arm deltas are frame-relative and work uncalibrated.
"""
from __future__ import annotations

import math

import numpy as np

from ..actions import BaseVelocity, PartialCommand, clamp, tag_all
from ..geometry import (
    DeltaPose,
    Pose,
    Quat,
    Vec3,
    compose_delta,
    matrix_to_quat,
    quat_from_axis_angle,
    quat_normalize,
    quat_rotate,
    wrap_angle,
)
from .config import ConfigError, ParserConfig
from .events import ButtonInput, InputEvent, KeypointFrame

# Capture-frame -> robot-frame axis remap (columns: images of x, y, z).
ALIGN_QUAT: Quat = matrix_to_quat(
    np.array([[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
)

_UP_AXIS: Vec3 = (0.0, -1.0, 0.0)  # camera -y is the operator's up


def _ema_vec(prev: Vec3 | None, new: Vec3, alpha: float) -> Vec3:
    if prev is None:
        return new
    return tuple(alpha * n + (1.0 - alpha) * p for p, n in zip(prev, new))


def _ema_angle(prev: float | None, new: float, alpha: float) -> float:
    if prev is None:
        return new
    return wrap_angle(prev + alpha * wrap_angle(new - prev))


def _ema_quat(prev: Quat | None, new: Quat, alpha: float) -> Quat:
    if prev is None:
        return new
    dot = sum(p * n for p, n in zip(prev, new))
    sign = 1.0 if dot >= 0.0 else -1.0
    blended = tuple((1.0 - alpha) * p + alpha * sign * n for p, n in zip(prev, new))
    return quat_normalize(blended)


def _remap(v: Vec3) -> Vec3:
    return quat_rotate(ALIGN_QUAT, v)


class VisionParser:
    def __init__(self, device_id: str, cfg: ParserConfig | None = None):
        self.device_id = device_id
        self.cfg = cfg or ParserConfig()
        self._engaged = self.cfg.engaged_by_default
        self._dist_min = self.cfg.torso_dist_min
        self._dist_max = self.cfg.torso_dist_max
        # smoothed keypoint state
        self._hip: Vec3 | None = None
        self._yaw: float | None = None
        self._palm: dict[str, Pose | None] = {"left": None, "right": None}
        self._dist: float | None = None
        self._last_t: int | None = None
        # previous-frame values the per-frame deltas are measured against
        self._prev_hip: Vec3 | None = None
        self._prev_yaw: float | None = None
        self._prev_palm_rel: dict[str, Pose | None] = {"left": None, "right": None}
        # pending output, drained by tick()
        self._pend_base: BaseVelocity | None = None
        self._pend_torso: float | None = None
        self._pend_arm: dict[str, DeltaPose | None] = {"left_arm": None, "right_arm": None}

    @property
    def calibrated(self) -> bool:
        return self._dist_min is not None and self._dist_max is not None

    @staticmethod
    def hip_ankle_distance(frame: KeypointFrame) -> float:
        mid = tuple(
            (a + b) / 2.0 for a, b in zip(frame.left_ankle, frame.right_ankle)
        )
        return math.dist(frame.hip_center, mid)

    def calibrate(self, frames: list[KeypointFrame]) -> None:
        """Capture the standing pose: max torso extension = mean standing
        hip-to-ankle distance; the crouch floor defaults to a configured
        fraction of it."""
        if not frames:
            raise ConfigError("calibration requires at least one keypoint frame")
        dists = [self.hip_ankle_distance(f) for f in frames]
        self._dist_max = sum(dists) / len(dists)
        self._dist_min = self.cfg.crouch_ratio * self._dist_max
        if not self._dist_min < self._dist_max:
            raise ConfigError(
                f"degenerate torso calibration: [{self._dist_min}, {self._dist_max}]"
            )

    def feed(self, ev: InputEvent) -> None:
        p = ev.payload
        if isinstance(p, ButtonInput):
            if self.cfg.engage_button is not None and p.index == self.cfg.engage_button:
                if p.pressed:
                    self._engaged = not self._engaged
                    if not self._engaged:
                        self._prev_palm_rel = {"left": None, "right": None}
            return
        if not isinstance(p, KeypointFrame):
            return
        self._ingest(p, ev.timestamp)

    def _ingest(self, frame: KeypointFrame, t: int) -> None:
        cfg = self.cfg
        alpha = cfg.smoothing
        thresh = cfg.confidence_threshold
        dt = None if self._last_t is None else (t - self._last_t) * 1e-6
        self._last_t = t

        hips_ok = frame.conf("hips") >= thresh
        ankles_ok = (
            frame.conf("left_ankle") >= thresh and frame.conf("right_ankle") >= thresh
        )

        if hips_ok:
            self._hip = _ema_vec(self._hip, frame.hip_center, alpha)
            self._yaw = _ema_angle(self._yaw, frame.hip_yaw, alpha)
        else:
            # tracking lost: drop the histories so its return causes no spike
            self._prev_hip = None
            self._prev_yaw = None
            self._prev_palm_rel = {"left": None, "right": None}

        # base velocity from hip displacement and yaw rate
        if (
            hips_ok
            and self.calibrated
            and dt is not None
            and dt > 0.0
            and self._prev_hip is not None
            and self._prev_yaw is not None
        ):
            dx = self._hip[0] - self._prev_hip[0]
            dz = self._hip[2] - self._prev_hip[2]
            dyaw = wrap_angle(self._yaw - self._prev_yaw)
            self._pend_base = BaseVelocity(
                cfg.base_linear_gain * (-dz) / dt,
                cfg.base_linear_gain * dx / dt,
                cfg.base_angular_gain * dyaw / dt,
            )
        if hips_ok:
            self._prev_hip = self._hip
            self._prev_yaw = self._yaw

        # torso from normalized hip height
        if hips_ok and ankles_ok and self.calibrated:
            dist = self.hip_ankle_distance(frame)
            self._dist = dist if self._dist is None else (
                alpha * dist + (1.0 - alpha) * self._dist
            )
            self._pend_torso = clamp(
                (self._dist - self._dist_min) / (self._dist_max - self._dist_min),
                0.0,
                1.0,
            )

        # arm deltas from palm pose relative to the hip frame
        if hips_ok and self._engaged:
            hip_pose = Pose(
                self._hip, quat_from_axis_angle(_UP_AXIS, self._yaw)
            )
            hip_inv = hip_pose.inverse()
            for hand, arm in (("left", "left_arm"), ("right", "right_arm")):
                palm_raw = getattr(frame, f"{hand}_palm")
                if frame.conf(f"{hand}_palm") < thresh:
                    self._prev_palm_rel[hand] = None
                    continue
                prev_sm = self._palm[hand]
                smoothed = Pose(
                    _ema_vec(prev_sm.position if prev_sm else None, palm_raw.position, alpha),
                    _ema_quat(
                        prev_sm.orientation if prev_sm else None, palm_raw.orientation, alpha
                    ),
                )
                self._palm[hand] = smoothed
                rel = hip_inv.transform(smoothed)
                prev_rel = self._prev_palm_rel[hand]
                if prev_rel is not None:
                    d = compose_delta(prev_rel, rel)
                    step = DeltaPose(
                        tuple(c * cfg.translation_gain for c in _remap(d.translation)),
                        tuple(c * cfg.rotation_gain for c in _remap(d.rotation)),
                    )
                    pending = self._pend_arm[arm]
                    self._pend_arm[arm] = step if pending is None else pending.then(step)
                self._prev_palm_rel[hand] = rel
        else:
            self._prev_palm_rel = {"left": None, "right": None}

    def tick(self, timestamp: int) -> PartialCommand:
        fields: dict = {}
        if self._pend_base is not None:
            fields["base"] = self._pend_base
        if self._pend_torso is not None:
            fields["torso"] = self._pend_torso
        for arm in ("left_arm", "right_arm"):
            if self._pend_arm[arm] is not None:
                fields[arm] = self._pend_arm[arm]
        self._pend_base = None
        self._pend_torso = None
        self._pend_arm = {"left_arm": None, "right_arm": None}
        return tag_all(fields, self.device_id, timestamp)
