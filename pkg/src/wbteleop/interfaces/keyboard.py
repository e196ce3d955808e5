"""Keyboard parser: each key drives a single DoF while held.

Keymap targets are strings with an optional trailing sign:

    base.vx  base.vy  base.wz         velocity, emitted every tick while held
    left_arm.x ... left_arm.rz        per-tick pose delta (x,y,z,rx,ry,rz)
    right_arm.x ... right_arm.rz
    torso                             per-tick adjustment of the height target
    left_gripper  right_gripper       toggle open/closed on key press

e.g. ``{"w": "base.vx", "s": "base.vx-", "q": "left_arm.rz+"}``.  Gains come
from ParserConfig per target class.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..actions import BaseVelocity, PartialCommand, clamp, tag_all
from ..geometry import DeltaPose
from .config import ConfigError, ParserConfig
from .events import InputEvent, KeyInput

_ARM_AXES = {"x": 0, "y": 1, "z": 2, "rx": 3, "ry": 4, "rz": 5}
_BASE_AXES = {"vx": 0, "vy": 1, "wz": 2}


@dataclass(frozen=True)
class KeyTarget:
    field: str  # left_arm | right_arm | base | torso | left_gripper | right_gripper
    axis: int  # 0-5 for arms, 0-2 for base, 0 otherwise
    sign: float  # +1 or -1


def parse_key_target(spec: str) -> KeyTarget:
    s = spec.strip()
    sign = 1.0
    if s.endswith("+") or s.endswith("-"):
        sign = -1.0 if s[-1] == "-" else 1.0
        s = s[:-1]
    if s in ("left_gripper", "right_gripper", "torso"):
        return KeyTarget(s, 0, sign)
    if "." in s:
        head, _, axis = s.partition(".")
        if head == "base" and axis in _BASE_AXES:
            return KeyTarget("base", _BASE_AXES[axis], sign)
        if head in ("left_arm", "right_arm") and axis in _ARM_AXES:
            return KeyTarget(head, _ARM_AXES[axis], sign)
    raise ConfigError(f"unknown keymap target {spec!r}")


def parse_keymap(raw: dict) -> dict[str, KeyTarget]:
    keymap: dict[str, KeyTarget] = {}
    for key, target in raw.items():
        key = str(key)
        if key in keymap:
            raise ConfigError(f"key {key!r} assigned twice")
        keymap[key] = parse_key_target(str(target))
    return keymap


class KeyboardParser:
    """Turns held keys into per-tick command contributions.

    Pure per tick: output depends only on the held-key set, the internal
    gripper/torso targets, and the config — identical event streams replay to
    identical partials.
    """

    def __init__(self, device_id: str, keymap: dict, cfg: ParserConfig | None = None):
        self.device_id = device_id
        self.cfg = cfg or ParserConfig()
        self.keymap = keymap if all(isinstance(v, KeyTarget) for v in keymap.values()) \
            else parse_keymap(keymap)
        self._held: set[str] = set()
        self._grippers = {"left_gripper": 0.0, "right_gripper": 0.0}
        self._gripper_dirty: set[str] = set()
        self._torso = clamp(self.cfg.torso_initial, 0.0, 1.0)
        self._base_was_active = False

    def feed(self, ev: InputEvent) -> None:
        p = ev.payload
        if not isinstance(p, KeyInput):
            return
        target = self.keymap.get(p.code)
        if p.pressed:
            if p.code not in self._held:  # ignore auto-repeat
                self._held.add(p.code)
                if target is not None and target.field in self._grippers:
                    cur = self._grippers[target.field]
                    self._grippers[target.field] = 0.0 if cur >= 0.5 else 1.0
                    self._gripper_dirty.add(target.field)
        else:
            self._held.discard(p.code)

    def tick(self, timestamp: int) -> PartialCommand:
        arm = {"left_arm": [0.0] * 6, "right_arm": [0.0] * 6}
        arm_active = {"left_arm": False, "right_arm": False}
        base = [0.0, 0.0, 0.0]
        base_active = False
        torso_step = 0.0
        torso_active = False
        cfg = self.cfg

        for code in self._held:
            t = self.keymap.get(code)
            if t is None:
                continue
            if t.field == "base":
                gain = cfg.base_angular_gain if t.axis == 2 else cfg.base_linear_gain
                base[t.axis] += gain * t.sign
                base_active = True
            elif t.field in arm:
                gain = cfg.translation_gain if t.axis < 3 else cfg.rotation_gain
                arm[t.field][t.axis] += gain * t.sign
                arm_active[t.field] = True
            elif t.field == "torso":
                torso_step += cfg.torso_gain * t.sign
                torso_active = True

        fields: dict = {}
        if base_active:
            fields["base"] = BaseVelocity(*base)
        elif self._base_was_active:
            # releasing the last base key is an explicit stop, not silence:
            # without this the consolidator would hold the old velocity for a
            # full staleness TTL
            fields["base"] = BaseVelocity.zero()
        self._base_was_active = base_active
        for name in ("left_arm", "right_arm"):
            if arm_active[name]:
                fields[name] = DeltaPose(tuple(arm[name][:3]), tuple(arm[name][3:]))
        if torso_active:
            self._torso = clamp(self._torso + torso_step, 0.0, 1.0)
            fields["torso"] = self._torso
        for name in self._gripper_dirty:
            fields[name] = self._grippers[name]
        self._gripper_dirty.clear()

        return tag_all(fields, self.device_id, timestamp)
