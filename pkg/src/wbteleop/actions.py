"""Unified whole-body action command and its flat 17-float vector layout.

``ActionCommand`` is the lingua franca between device parsers, the channel,
and the robot mapper: every field is optional (a parser only fills what its
device controls) and every present field carries the id of the device that
produced it.

The flat vector layout, shared byte-for-byte by recordings and the wire
protocol (17 little-endian float32s), is:

    [0:3]   left arm translation delta (m)
    [3:6]   left arm rotation delta, rotation vector (rad)
    [6]     left gripper target in [0, 1] (1 = closed)
    [7:10]  right arm translation delta (m)
    [10:13] right arm rotation delta, rotation vector (rad)
    [13]    right gripper target in [0, 1]
    [14]    base forward velocity vx (m/s)
    [15]    base lateral velocity vy (m/s, zero on differential-drive bases)
    [16]    base yaw velocity wz (rad/s)

Torso height has no slot in the flat vector; it travels only inside
ActionCommand.  Range clamps (gripper [0,1], base velocity caps) are applied
where commands enter the control path — at consolidation and embodiment
mapping — so that flatten/unflatten stays an exact bijection on the numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import DeltaPose

ACTION_DIM = 17
ACTION_DTYPE = np.dtype("<f4")
ACTION_BYTES = ACTION_DIM * ACTION_DTYPE.itemsize

# Default base velocity caps, used wherever a tighter cap is not configured.
DEFAULT_LINEAR_LIMIT = 1.0  # m/s
DEFAULT_ANGULAR_LIMIT = 1.5  # rad/s

# Field names, in flat-layout order (torso last, outside the vector).
COMMAND_FIELDS = ("left_arm", "right_arm", "left_gripper", "right_gripper", "base", "torso")


def clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else (hi if v > hi else float(v))


@dataclass(frozen=True)
class BaseVelocity:
    """Base twist in the robot frame: +x forward, +y left, +z yaw (CCW)."""

    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0

    @staticmethod
    def zero() -> "BaseVelocity":
        return BaseVelocity()

    def is_zero(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0 and self.wz == 0.0

    def clamped(
        self,
        linear_limit: float = DEFAULT_LINEAR_LIMIT,
        angular_limit: float = DEFAULT_ANGULAR_LIMIT,
    ) -> "BaseVelocity":
        return BaseVelocity(
            clamp(self.vx, -linear_limit, linear_limit),
            clamp(self.vy, -linear_limit, linear_limit),
            clamp(self.wz, -angular_limit, angular_limit),
        )


@dataclass(frozen=True)
class ActionCommand:
    """One tick's whole-body command; absent fields mean "no opinion".

    ``sources`` maps each *present* field name to the device id that produced
    it.  Parsers emit partial commands (only their fields present, all tagged
    with their own device id); the compositor and consolidator assemble and
    complete them.
    """

    left_arm: DeltaPose | None = None
    right_arm: DeltaPose | None = None
    left_gripper: float | None = None
    right_gripper: float | None = None
    base: BaseVelocity | None = None
    torso: float | None = None
    timestamp: int = 0  # monotonic microseconds
    sources: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        present = {name for name in COMMAND_FIELDS if getattr(self, name) is not None}
        tagged = set(self.sources)
        if present != tagged:
            raise ValueError(
                f"source tags {sorted(tagged)} do not match present fields {sorted(present)}"
            )

    @staticmethod
    def empty(timestamp: int = 0) -> "ActionCommand":
        return ActionCommand(timestamp=timestamp)

    def present_fields(self) -> tuple[str, ...]:
        return tuple(name for name in COMMAND_FIELDS if getattr(self, name) is not None)

    def is_empty(self) -> bool:
        return not self.sources

    def with_timestamp(self, timestamp: int) -> "ActionCommand":
        return replace(self, timestamp=int(timestamp))


# A parser's per-tick output: an ActionCommand carrying only the fields that
# parser is configured to control, each tagged with the parser's device id.
PartialCommand = ActionCommand


def tag_all(fields: dict, device_id: str, timestamp: int) -> ActionCommand:
    """Build a PartialCommand from a field dict, tagging every present field."""
    present = {k: v for k, v in fields.items() if v is not None}
    return ActionCommand(
        timestamp=int(timestamp),
        sources={name: device_id for name in present},
        **present,
    )


def flatten(cmd: ActionCommand) -> np.ndarray:
    """Pack a command into the 17-float32 layout; absent fields become zeros."""
    out = np.zeros(ACTION_DIM, dtype=ACTION_DTYPE)
    if cmd.left_arm is not None:
        out[0:6] = cmd.left_arm.as_vector()
    if cmd.left_gripper is not None:
        out[6] = cmd.left_gripper
    if cmd.right_arm is not None:
        out[7:13] = cmd.right_arm.as_vector()
    if cmd.right_gripper is not None:
        out[13] = cmd.right_gripper
    if cmd.base is not None:
        out[14] = cmd.base.vx
        out[15] = cmd.base.vy
        out[16] = cmd.base.wz
    return out


def unflatten(vec, timestamp: int = 0) -> ActionCommand:
    """Expand a 17-vector into a command with every vector-backed field present.

    The flat form cannot express absence, so deltas/grippers/base are always
    present (source tag "vector"); torso has no slot and stays absent.
    """
    arr = np.asarray(vec, dtype=ACTION_DTYPE)
    if arr.shape != (ACTION_DIM,):
        raise ValueError(f"expected {ACTION_DIM} entries, got shape {arr.shape}")
    vals = [float(x) for x in arr]
    return ActionCommand(
        left_arm=DeltaPose(tuple(vals[0:3]), tuple(vals[3:6])),
        right_arm=DeltaPose(tuple(vals[7:10]), tuple(vals[10:13])),
        left_gripper=vals[6],
        right_gripper=vals[13],
        base=BaseVelocity(vals[14], vals[15], vals[16]),
        timestamp=int(timestamp),
        sources={
            name: "vector"
            for name in ("left_arm", "right_arm", "left_gripper", "right_gripper", "base")
        },
    )


def vector_to_bytes(vec: np.ndarray) -> bytes:
    arr = np.asarray(vec, dtype=ACTION_DTYPE)
    if arr.shape != (ACTION_DIM,):
        raise ValueError(f"expected {ACTION_DIM} entries, got shape {arr.shape}")
    return arr.tobytes()


def vector_from_bytes(raw: bytes) -> np.ndarray:
    if len(raw) != ACTION_BYTES:
        raise ValueError(f"expected {ACTION_BYTES} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=ACTION_DTYPE).copy()
