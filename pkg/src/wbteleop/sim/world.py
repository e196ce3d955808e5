"""Deterministic kinematic world: base, joints, objects, grasp constraints.

There is no contact physics.  Objects move only while rigidly attached to a
hand by a grasp constraint; the constrained pose is recomputed every step
from the hand's forward kinematics (never integrated), so attachment error
is exactly zero by construction.

Grasp engage/release happens inside ``step``, driven by the gripper position
crossing the 0.5 threshold (closing past it engages, opening past it
releases).  Tying the trigger to simulated gripper state keeps recorded
command streams bit-replayable.

``state_hash`` is 64-bit FNV-1a over the canonical little-endian
serialization produced by ``canonical_state_bytes`` — the layout is part of
the container format and documented in docs/wire_format.md.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace

from ..actions import clamp
from ..geometry import Pose, quat_from_axis_angle, quat_rotate, wrap_angle
from ..robot.embodiment import EmbodimentSpec
from ..robot.kinematics import forward_kinematics
from ..robot.mapping import JointState, RobotCommand

GRASP_RANGE = 0.03  # max hand-to-surface distance for a grasp to latch, m
GRIP_THRESHOLD = 0.5  # gripper position that toggles the constraint

SHAPES = ("box", "sphere", "cylinder")


@dataclass(frozen=True)
class SceneObject:
    """Primitive shape.  dims: box = half-extents (hx, hy, hz);
    sphere = (radius, 0, 0); cylinder = (radius, half_height, 0), axis +z."""

    id: str
    shape: str
    dims: tuple[float, float, float]
    pose: Pose
    graspable: bool = False
    color: tuple[int, int, int] = (128, 128, 128)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"object {self.id!r}: unknown shape {self.shape!r}")
        dims = tuple(float(d) for d in self.dims)
        if len(dims) != 3 or any(d < 0 for d in dims):
            raise ValueError(f"object {self.id!r}: bad dims {self.dims!r}")
        object.__setattr__(self, "dims", dims)
        color = tuple(int(c) for c in self.color)
        if len(color) != 3 or any(not 0 <= c <= 255 for c in color):
            raise ValueError(f"object {self.id!r}: bad color {self.color!r}")
        object.__setattr__(self, "color", color)


@dataclass(frozen=True)
class WorldState:
    base: tuple[float, float, float] = (0.0, 0.0, 0.0)  # x, y, theta
    joints: JointState = field(default_factory=JointState)
    objects: tuple[SceneObject, ...] = ()
    grasps: dict[str, tuple[str, Pose]] = field(default_factory=dict)  # hand -> (id, rel)
    sim_time: float = 0.0

    def object_by_id(self, obj_id: str) -> SceneObject:
        for obj in self.objects:
            if obj.id == obj_id:
                return obj
        raise KeyError(f"no object {obj_id!r}")


def base_pose(state: WorldState) -> Pose:
    x, y, theta = state.base
    return Pose((x, y, 0.0), quat_from_axis_angle((0.0, 0.0, 1.0), theta))


def hand_pose(state: WorldState, spec: EmbodimentSpec, side: str) -> Pose:
    """World pose of a hand EE frame."""
    chain = spec.arms[side]
    return base_pose(state).transform(forward_kinematics(chain, state.joints.arms[side]))


def surface_distance(obj: SceneObject, point) -> float:
    """Signed distance from a world point to the object surface (< 0 inside)."""
    local = obj.pose.inverse().transform_point(tuple(point))
    x, y, z = local
    if obj.shape == "sphere":
        return math.sqrt(x * x + y * y + z * z) - obj.dims[0]
    if obj.shape == "box":
        hx, hy, hz = obj.dims
        dx, dy, dz = abs(x) - hx, abs(y) - hy, abs(z) - hz
        outside = math.sqrt(max(dx, 0) ** 2 + max(dy, 0) ** 2 + max(dz, 0) ** 2)
        return outside + min(max(dx, dy, dz), 0.0)
    # cylinder
    r, hh, _ = obj.dims
    dr = math.hypot(x, y) - r
    dz = abs(z) - hh
    outside = math.hypot(max(dr, 0.0), max(dz, 0.0))
    return outside + min(max(dr, dz), 0.0)


def _integrate_base(base, vx: float, vy: float, wz: float, dt: float):
    """Closed-form constant-twist arc; exact for any dt."""
    x, y, theta = base
    if abs(wz) > 1e-6:
        theta_new = theta + wz * dt
        sin0, cos0 = math.sin(theta), math.cos(theta)
        sin1, cos1 = math.sin(theta_new), math.cos(theta_new)
        x += (vx * (sin1 - sin0) + vy * (cos1 - cos0)) / wz
        y += (-vx * (cos1 - cos0) + vy * (sin1 - sin0)) / wz
        return (x, y, theta_new)
    c, s = math.cos(theta), math.sin(theta)
    return (x + (vx * c - vy * s) * dt, y + (vx * s + vy * c) * dt, theta)


def _toward(cur: float, target: float, max_step: float) -> float:
    d = target - cur
    if d > max_step:
        return cur + max_step
    if d < -max_step:
        return cur - max_step
    return target


def set_grasp(state: WorldState, spec: EmbodimentSpec, hand: str, engage: bool) -> WorldState:
    """Engage: latch the nearest graspable object within range (no-op if none);
    release: drop the constraint, object keeps its current pose."""
    if not engage:
        if hand not in state.grasps:
            return state
        grasps = dict(state.grasps)
        del grasps[hand]
        return replace(state, grasps=grasps)

    if hand in state.grasps:
        return state
    ee = hand_pose(state, spec, hand)
    best: tuple[float, SceneObject] | None = None
    for obj in state.objects:
        if not obj.graspable:
            continue
        if any(obj.id == gid for gid, _ in state.grasps.values()):
            continue  # already held by the other hand
        d = surface_distance(obj, ee.position)
        if d <= GRASP_RANGE and (best is None or d < best[0]):
            best = (d, obj)
    if best is None:
        return state
    rel = ee.inverse().transform(best[1].pose)
    grasps = dict(state.grasps)
    grasps[hand] = (best[1].id, rel)
    return replace(state, grasps=grasps)


def step(
    state: WorldState, cmd: RobotCommand, dt: float, spec: EmbodimentSpec
) -> WorldState:
    """Advance the world by one tick.  Deterministic; no physics drift."""
    if not 0.0 < dt <= 0.1:
        raise ValueError(f"dt must be in (0, 0.1], got {dt}")

    vy = cmd.base.vy if spec.base_type == "omnidirectional" else 0.0
    new_base = _integrate_base(state.base, cmd.base.vx, vy, cmd.base.wz, dt)

    arms = {}
    for side, chain in spec.arms.items():
        q = list(state.joints.arms[side])
        target = cmd.arm_targets.get(side, tuple(q))
        for i, joint in enumerate(chain.joints):
            stepped = _toward(q[i], target[i], joint.max_velocity * dt)
            q[i] = clamp(stepped, *joint.limits)
        arms[side] = tuple(q)

    torso = state.joints.torso
    if spec.torso is not None and cmd.torso_target is not None:
        goal = clamp(cmd.torso_target, *spec.torso.range)
        torso = _toward(torso, goal, spec.torso.max_velocity * dt)

    grippers = {}
    crossings: dict[str, bool | None] = {}
    for side in spec.arms:
        cur = state.joints.grippers.get(side, 0.0)
        goal = clamp(cmd.gripper_targets.get(side, cur), 0.0, 1.0)
        new = _toward(cur, goal, spec.gripper_speed * dt)
        grippers[side] = new
        if cur < GRIP_THRESHOLD <= new:
            crossings[side] = True  # closed past the threshold: engage
        elif new < GRIP_THRESHOLD <= cur:
            crossings[side] = False  # opened past the threshold: release
        else:
            crossings[side] = None

    mid = replace(
        state,
        base=new_base,
        joints=JointState(arms=arms, torso=torso, grippers=grippers),
        sim_time=state.sim_time + dt,
    )

    for side, edge in crossings.items():
        if edge is not None:
            mid = set_grasp(mid, spec, side, edge)

    if mid.grasps:
        held = {}
        for hand, (obj_id, rel) in mid.grasps.items():
            held[obj_id] = hand_pose(mid, spec, hand).transform(rel)
        objects = tuple(
            replace(o, pose=held[o.id]) if o.id in held else o for o in mid.objects
        )
        mid = replace(mid, objects=objects)
    return mid


# --- canonical serialization and hashing ---

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def _pack_str(out: bytearray, s: str) -> None:
    raw = s.encode("utf-8")
    out += struct.pack("<H", len(raw))
    out += raw


def canonical_state_bytes(state: WorldState) -> bytes:
    """Little-endian, order-stable serialization used for hashing."""
    out = bytearray()
    out += struct.pack("<3d", *state.base)
    out += struct.pack("<B", len(state.joints.arms))
    for side in sorted(state.joints.arms):
        _pack_str(out, side)
        q = state.joints.arms[side]
        out += struct.pack("<B", len(q))
        out += struct.pack(f"<{len(q)}d", *q)
    out += struct.pack("<d", state.joints.torso)
    out += struct.pack("<B", len(state.joints.grippers))
    for side in sorted(state.joints.grippers):
        _pack_str(out, side)
        out += struct.pack("<d", state.joints.grippers[side])
    out += struct.pack("<H", len(state.objects))
    for obj in state.objects:
        _pack_str(out, obj.id)
        out += struct.pack("<B", SHAPES.index(obj.shape))
        out += struct.pack("<3d", *obj.dims)
        out += struct.pack("<3d", *obj.pose.position)
        out += struct.pack("<4d", *obj.pose.orientation)
        out += struct.pack("<B", 1 if obj.graspable else 0)
        out += struct.pack("<3B", *obj.color)
    out += struct.pack("<B", len(state.grasps))
    for hand in sorted(state.grasps):
        obj_id, rel = state.grasps[hand]
        _pack_str(out, hand)
        _pack_str(out, obj_id)
        out += struct.pack("<3d", *rel.position)
        out += struct.pack("<4d", *rel.orientation)
    out += struct.pack("<d", state.sim_time)
    return bytes(out)


def state_hash(state: WorldState) -> int:
    return fnv1a64(canonical_state_bytes(state))
