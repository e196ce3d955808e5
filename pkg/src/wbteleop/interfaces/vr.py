"""Tracked-hand-controller parser (VR style).

Hand deltas: while a hand's clutch button is held, the per-tick displacement
of its tracked pose becomes that arm's DeltaPose, scaled by the configured
gains.  The anchor resets on clutch engage, so re-engaging after moving the
controller never causes a jump.  With no clutch state ever received the hand
is disengaged (safe default).

Joystick axes map to base velocity, a designated axis drives the torso height
target, and trigger axes map directly to the grippers.
"""
from __future__ import annotations

from ..actions import BaseVelocity, PartialCommand, clamp, tag_all
from ..geometry import Pose, compose_delta
from .config import ParserConfig
from .events import AxisInput, ButtonInput, InputEvent, TrackedPose

HANDS = ("left", "right")


class VrParser:
    def __init__(self, device_id: str, cfg: ParserConfig | None = None):
        self.device_id = device_id
        self.cfg = cfg or ParserConfig()
        self._pose: dict[str, Pose | None] = {h: None for h in HANDS}
        self._anchor: dict[str, Pose | None] = {h: None for h in HANDS}
        self._engaged: dict[str, bool] = {h: False for h in HANDS}
        self._axes: dict[int, float] = {}
        self._torso = clamp(self.cfg.torso_initial, 0.0, 1.0)

    def _clutch_button(self, hand: str) -> int:
        return self.cfg.left_clutch_button if hand == "left" else self.cfg.right_clutch_button

    def feed(self, ev: InputEvent) -> None:
        p = ev.payload
        if isinstance(p, TrackedPose):
            self._pose[p.hand] = p.pose
        elif isinstance(p, ButtonInput):
            for hand in HANDS:
                if p.index == self._clutch_button(hand):
                    if p.pressed and not self._engaged[hand]:
                        self._anchor[hand] = self._pose[hand]
                    self._engaged[hand] = p.pressed
        elif isinstance(p, AxisInput):
            self._axes[p.index] = p.value

    def _axis(self, idx: int, deadband: bool = True) -> float:
        v = self._axes.get(idx, 0.0)
        if deadband and abs(v) < self.cfg.deadband:
            return 0.0
        return v

    def tick(self, timestamp: int) -> PartialCommand:
        cfg = self.cfg
        fields: dict = {}

        for hand, arm in (("left", "left_arm"), ("right", "right_arm")):
            cur = self._pose[hand]
            if not self._engaged[hand] or cur is None:
                continue
            anchor = self._anchor[hand]
            if anchor is None:
                self._anchor[hand] = cur  # first pose since engage: start here
                continue
            fields[arm] = compose_delta(anchor, cur).scaled(
                cfg.translation_gain, cfg.rotation_gain
            )
            self._anchor[hand] = cur

        if any(i in self._axes for i in (cfg.base_axis_vx, cfg.base_axis_vy, cfg.base_axis_wz)):
            fields["base"] = BaseVelocity(
                self._axis(cfg.base_axis_vx) * cfg.base_linear_gain,
                self._axis(cfg.base_axis_vy) * cfg.base_linear_gain,
                self._axis(cfg.base_axis_wz) * cfg.base_angular_gain,
            )

        rate = self._axis(cfg.torso_axis)
        if rate != 0.0:
            self._torso = clamp(self._torso + rate * cfg.torso_gain, 0.0, 1.0)
            fields["torso"] = self._torso

        if cfg.left_trigger_axis in self._axes:
            fields["left_gripper"] = clamp(self._axes[cfg.left_trigger_axis], 0.0, 1.0)
        if cfg.right_trigger_axis in self._axes:
            fields["right_gripper"] = clamp(self._axes[cfg.right_trigger_axis], 0.0, 1.0)

        return tag_all(fields, self.device_id, timestamp)
