"""6-axis puck parser with a mode cycle over body parts.

The device reports six axes in [-1,1] plus buttons.  The mode button cycles
left arm -> right arm -> base -> torso -> left arm...  In arm modes the six
axes scale to a per-tick pose delta; in base mode axes (0, 1, 5) map to
(vx, vy, wz) and the rest are discarded; in torso mode axis 2 drives the
height target up/down.  The second button toggles the active arm's gripper.
"""
from __future__ import annotations

from ..actions import BaseVelocity, PartialCommand, clamp, tag_all
from ..geometry import DeltaPose
from .config import ParserConfig
from .events import AxisInput, ButtonInput, InputEvent

MODES = ("left_arm", "right_arm", "base", "torso")


class SixDofParser:
    def __init__(self, device_id: str, cfg: ParserConfig | None = None):
        self.device_id = device_id
        self.cfg = cfg or ParserConfig()
        self.mode_index = 0
        self._axes = [0.0] * 6
        self._buttons_down: set[int] = set()
        self._grippers = {"left_arm": 0.0, "right_arm": 0.0}
        self._gripper_dirty: str | None = None
        self._torso = clamp(self.cfg.torso_initial, 0.0, 1.0)
        self._torso_seen = False
        self._base_stop_pending = False

    @property
    def mode(self) -> str:
        return MODES[self.mode_index]

    def feed(self, ev: InputEvent) -> None:
        p = ev.payload
        if isinstance(p, AxisInput):
            if 0 <= p.index < 6:
                self._axes[p.index] = p.value
        elif isinstance(p, ButtonInput):
            if p.pressed and p.index not in self._buttons_down:
                self._buttons_down.add(p.index)
                if p.index == self.cfg.mode_button:
                    if self.mode == "base":
                        self._base_stop_pending = True
                    self.mode_index = (self.mode_index + 1) % len(MODES)
                elif p.index == self.cfg.gripper_button and self.mode in self._grippers:
                    arm = self.mode
                    cur = self._grippers[arm]
                    self._grippers[arm] = 0.0 if cur >= 0.5 else 1.0
                    self._gripper_dirty = arm
            elif not p.pressed:
                self._buttons_down.discard(p.index)

    def _deadbanded(self, idx: int) -> float:
        v = self._axes[idx]
        return 0.0 if abs(v) < self.cfg.deadband else v

    def tick(self, timestamp: int) -> PartialCommand:
        cfg = self.cfg
        fields: dict = {}
        mode = self.mode

        if mode in ("left_arm", "right_arm"):
            trans = tuple(self._deadbanded(i) * cfg.translation_gain for i in range(3))
            rot = tuple(self._deadbanded(i) * cfg.rotation_gain for i in range(3, 6))
            if any(trans) or any(rot):
                fields[mode] = DeltaPose(trans, rot)
        elif mode == "base":
            # axes (0, 1, 5) -> (vx, vy, wz); axes 2-4 discarded in this mode
            fields["base"] = BaseVelocity(
                self._deadbanded(0) * cfg.base_linear_gain,
                self._deadbanded(1) * cfg.base_linear_gain,
                self._deadbanded(5) * cfg.base_angular_gain,
            )
        elif mode == "torso":
            rate = self._deadbanded(2)
            if rate != 0.0 or not self._torso_seen:
                self._torso = clamp(self._torso + rate * cfg.torso_gain, 0.0, 1.0)
                self._torso_seen = True
                fields["torso"] = self._torso

        if self._base_stop_pending and "base" not in fields:
            # leaving base mode is an explicit stop (the axes no longer steer
            # the base, so a held velocity must not outlive the mode)
            fields["base"] = BaseVelocity.zero()
        self._base_stop_pending = False

        if self._gripper_dirty is not None:
            name = "left_gripper" if self._gripper_dirty == "left_arm" else "right_gripper"
            fields[name] = self._grippers[self._gripper_dirty]
            self._gripper_dirty = None

        return tag_all(fields, self.device_id, timestamp)
