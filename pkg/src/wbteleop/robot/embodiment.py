"""Embodiment descriptions: kinematic chains, torso, base type, cameras.

Embodiments are data files, not code.  Schema (YAML):

    name: tiago-like
    base_type: differential | omnidirectional
    max_linear_velocity: 1.0      # m/s cap on base commands
    max_angular_velocity: 1.5     # rad/s
    gripper_speed: 2.0            # normalized units/s
    torso:                        # optional prismatic lift
      range: [0.0, 0.35]          # meters
      max_velocity: 0.1
    arms:
      right:
        mount: {xyz: [x, y, z], rpy: [r, p, y]}   # base frame -> chain root
        tip:   {xyz: ..., rpy: ...}               # last joint -> EE frame
        home:  [q1, ..., qn]                      # start configuration
        joints:
          - name: shoulder_pan
            type: revolute | prismatic
            axis: [0, 0, 1]                       # unit, in the joint frame
            origin: {xyz: ..., rpy: ...}          # parent frame -> joint frame
            limits: [lo, hi]                      # rad or m
            max_velocity: 1.5                     # rad/s or m/s
    cameras:
      - {id: head, xyz: [0.10, 0.0, 1.25], pitch_deg: 28.0, yaw_deg: 0.0,
         width: 128, height: 128, vfov_deg: 60.0}

A camera is a pan/tilt unit: its optical frame (+z forward, +x image-right,
+y image-down) is the base frame yawed by ``yaw_deg``, pitched down by
``pitch_deg``, then remapped to the optical axis convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from ..geometry import Pose, Vec3, matrix_to_quat, quat_from_axis_angle, quat_multiply
from ..interfaces.config import ConfigError

# body frame (x forward, y left, z up) -> optical frame (z forward, y down)
_OPTICAL_QUAT = matrix_to_quat(
    np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
)

JOINT_TYPES = ("revolute", "prismatic")


@dataclass(frozen=True)
class Joint:
    name: str
    type: str
    axis: Vec3
    origin: Pose
    limits: tuple[float, float]
    max_velocity: float

    def __post_init__(self):
        if self.type not in JOINT_TYPES:
            raise ConfigError(f"joint {self.name!r}: unknown type {self.type!r}")
        ax, ay, az = (float(c) for c in self.axis)
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if abs(n - 1.0) > 1e-6:
            raise ConfigError(f"joint {self.name!r}: axis must be unit norm, |a|={n}")
        object.__setattr__(self, "axis", (ax / n, ay / n, az / n))
        lo, hi = (float(v) for v in self.limits)
        if not lo < hi:
            raise ConfigError(f"joint {self.name!r}: limits must satisfy lo < hi")
        object.__setattr__(self, "limits", (lo, hi))
        if self.max_velocity <= 0:
            raise ConfigError(f"joint {self.name!r}: max_velocity must be positive")


@dataclass(frozen=True)
class Chain:
    name: str
    mount: Pose
    joints: tuple[Joint, ...]
    tip: Pose = Pose.identity()
    home: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.joints:
            raise ConfigError(f"chain {self.name!r} has no joints")
        home = tuple(float(q) for q in self.home) if self.home else tuple(
            0.5 * (j.limits[0] + j.limits[1]) if not j.limits[0] <= 0.0 <= j.limits[1]
            else 0.0
            for j in self.joints
        )
        if len(home) != len(self.joints):
            raise ConfigError(
                f"chain {self.name!r}: home has {len(home)} entries for "
                f"{len(self.joints)} joints"
            )
        for q, j in zip(home, self.joints):
            if not j.limits[0] <= q <= j.limits[1]:
                raise ConfigError(f"chain {self.name!r}: home violates {j.name!r} limits")
        object.__setattr__(self, "home", home)

    @property
    def dof(self) -> int:
        return len(self.joints)


@dataclass(frozen=True)
class TorsoSpec:
    range: tuple[float, float]
    max_velocity: float

    def __post_init__(self):
        lo, hi = (float(v) for v in self.range)
        if not lo < hi:
            raise ConfigError("torso range must satisfy lo < hi")
        object.__setattr__(self, "range", (lo, hi))
        if self.max_velocity <= 0:
            raise ConfigError("torso max_velocity must be positive")


@dataclass(frozen=True)
class CameraSpec:
    id: str
    position: Vec3 = (0.0, 0.0, 1.0)
    pitch_deg: float = 0.0  # downward tilt
    yaw_deg: float = 0.0  # leftward pan
    width: int = 128
    height: int = 128
    vfov_deg: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if self.width <= 0 or self.height <= 0:
            raise ConfigError(f"camera {self.id!r}: bad resolution")
        if not 0.0 < self.vfov_deg < 180.0:
            raise ConfigError(f"camera {self.id!r}: vfov must be in (0, 180)")

    @property
    def mount(self) -> Pose:
        """Base-frame pose of the optical frame."""
        qz = quat_from_axis_angle((0.0, 0.0, 1.0), math.radians(self.yaw_deg))
        qy = quat_from_axis_angle((0.0, 1.0, 0.0), math.radians(self.pitch_deg))
        return Pose(self.position, quat_multiply(quat_multiply(qz, qy), _OPTICAL_QUAT))


@dataclass(frozen=True)
class EmbodimentSpec:
    name: str
    base_type: str
    arms: dict[str, Chain]
    torso: TorsoSpec | None = None
    cameras: tuple[CameraSpec, ...] = ()
    max_linear_velocity: float = 1.0
    max_angular_velocity: float = 1.5
    gripper_speed: float = 2.0

    def __post_init__(self):
        if self.base_type not in ("differential", "omnidirectional"):
            raise ConfigError(f"unknown base_type {self.base_type!r}")
        if not 1 <= len(self.arms) <= 2:
            raise ConfigError(f"embodiment needs 1 or 2 arms, got {len(self.arms)}")
        for side in self.arms:
            if side not in ("left", "right"):
                raise ConfigError(f"arm key must be 'left' or 'right', got {side!r}")

    def has_arm(self, side: str) -> bool:
        return side in self.arms


def _pose_from_node(node: dict | None) -> Pose:
    if node is None:
        return Pose.identity()
    return Pose.from_xyz_rpy(node.get("xyz", (0, 0, 0)), node.get("rpy", (0, 0, 0)))


def _chain_from_node(name: str, node: dict) -> Chain:
    joints = tuple(
        Joint(
            name=str(j["name"]),
            type=str(j["type"]),
            axis=tuple(j["axis"]),
            origin=_pose_from_node(j.get("origin")),
            limits=tuple(j["limits"]),
            max_velocity=float(j.get("max_velocity", 1.5)),
        )
        for j in node["joints"]
    )
    return Chain(
        name=name,
        mount=_pose_from_node(node.get("mount")),
        tip=_pose_from_node(node.get("tip")),
        joints=joints,
        home=tuple(node.get("home", ())),
    )


def spec_from_dict(doc: dict, origin: str = "<dict>") -> EmbodimentSpec:
    try:
        arms = {
            side: _chain_from_node(side, node) for side, node in doc["arms"].items()
        }
        torso = None
        if doc.get("torso") is not None:
            t = doc["torso"]
            torso = TorsoSpec(tuple(t["range"]), float(t.get("max_velocity", 0.1)))
        cameras = tuple(
            CameraSpec(
                id=str(c["id"]),
                position=tuple(c.get("xyz", (0.0, 0.0, 1.0))),
                pitch_deg=float(c.get("pitch_deg", 0.0)),
                yaw_deg=float(c.get("yaw_deg", 0.0)),
                width=int(c.get("width", 128)),
                height=int(c.get("height", 128)),
                vfov_deg=float(c.get("vfov_deg", 60.0)),
            )
            for c in doc.get("cameras", ())
        )
        return EmbodimentSpec(
            name=str(doc["name"]),
            base_type=str(doc["base_type"]),
            arms=arms,
            torso=torso,
            cameras=cameras,
            max_linear_velocity=float(doc.get("max_linear_velocity", 1.0)),
            max_angular_velocity=float(doc.get("max_angular_velocity", 1.5)),
            gripper_speed=float(doc.get("gripper_speed", 2.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing field {exc} in embodiment", path=origin) from exc
    except (TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed embodiment: {exc}", path=origin) from exc


def load_embodiment(name_or_path: str) -> EmbodimentSpec:
    """Load a bundled embodiment by name, or any YAML file by path."""
    if name_or_path.endswith((".yaml", ".yml")):
        with open(name_or_path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        return spec_from_dict(doc, origin=name_or_path)
    ref = resources.files("wbteleop").joinpath(f"data/embodiments/{name_or_path}.yaml")
    if not ref.is_file():
        raise ConfigError(f"unknown embodiment {name_or_path!r}")
    doc = yaml.safe_load(ref.read_text(encoding="utf-8"))
    return spec_from_dict(doc, origin=str(ref))


def bundled_embodiments() -> list[str]:
    root = resources.files("wbteleop").joinpath("data/embodiments")
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))
