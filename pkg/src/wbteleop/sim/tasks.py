"""Declarative task definitions: seeded scenes plus success predicates.

Task schema (YAML):

    name: pick_pot
    embodiment: tiago_like          # default, overridable per session
    time_limit: 120.0               # seconds of sim time
    start: {base: [x, y, theta]}
    objects:
      - id: table_a
        shape: box                  # box | sphere | cylinder
        dims: [0.40, 0.40, 0.02]    # box: half-extents; sphere: [r,0,0];
        pose: {xyz: [...], rpy: [...]}        # cylinder: [r, half_h, 0]
        color: [140, 90, 50]
        graspable: false
        randomize: {xy_jitter: 0.05, yaw_jitter: 0.0}   # uniform, seeded
    success:
      - object: pot
        in_region: {center: [x, y, z], half_extents: [hx, hy, hz]}
        require_released: true

Randomization draws are ordered (objects in file order; x, y, then yaw per
object), so a (task, seed) pair always regenerates the identical world.
The success predicate is pure: every clause must hold simultaneously.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources

import yaml

from ..geometry import Pose, quat_from_axis_angle, quat_multiply
from ..interfaces.config import ConfigError
from ..robot.embodiment import EmbodimentSpec
from ..robot.mapping import JointState
from .world import SceneObject, WorldState


@dataclass(frozen=True)
class SuccessClause:
    object_id: str
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    require_released: bool = True

    def holds(self, state: WorldState) -> bool:
        try:
            obj = state.object_by_id(self.object_id)
        except KeyError:
            return False
        if self.require_released and any(
            gid == self.object_id for gid, _ in state.grasps.values()
        ):
            return False
        return all(
            abs(p - c) <= h
            for p, c, h in zip(obj.pose.position, self.center, self.half_extents)
        )


@dataclass(frozen=True)
class ObjectTemplate:
    obj: SceneObject
    xy_jitter: float = 0.0
    yaw_jitter: float = 0.0


@dataclass(frozen=True)
class TaskSpec:
    name: str
    templates: tuple[ObjectTemplate, ...]
    success: tuple[SuccessClause, ...]
    time_limit: float = 120.0
    embodiment: str = "tiago_like"
    start_base: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def build(self, seed: int, spec: EmbodimentSpec) -> WorldState:
        """Instantiate the world for a seed; identical (task, seed) pairs
        yield identical states."""
        rng = random.Random(seed)
        objects = []
        for tpl in self.templates:
            obj = tpl.obj
            if tpl.xy_jitter > 0.0 or tpl.yaw_jitter > 0.0:
                dx = rng.uniform(-tpl.xy_jitter, tpl.xy_jitter) if tpl.xy_jitter else 0.0
                dy = rng.uniform(-tpl.xy_jitter, tpl.xy_jitter) if tpl.xy_jitter else 0.0
                dyaw = rng.uniform(-tpl.yaw_jitter, tpl.yaw_jitter) if tpl.yaw_jitter else 0.0
                px, py, pz = obj.pose.position
                orient = obj.pose.orientation
                if dyaw:
                    orient = quat_multiply(
                        quat_from_axis_angle((0.0, 0.0, 1.0), dyaw), orient
                    )
                obj = SceneObject(
                    id=obj.id,
                    shape=obj.shape,
                    dims=obj.dims,
                    pose=Pose((px + dx, py + dy, pz), orient),
                    graspable=obj.graspable,
                    color=obj.color,
                )
            objects.append(obj)
        return WorldState(
            base=self.start_base,
            joints=JointState.home(spec),
            objects=tuple(objects),
            sim_time=0.0,
        )


def check_task(state: WorldState, task: TaskSpec) -> tuple[bool, bool]:
    """(success, done): success when every clause holds, done on success or
    when the time limit is reached."""
    success = all(clause.holds(state) for clause in task.success)
    done = success or state.sim_time >= task.time_limit
    return success, done


def _pose_from_node(node: dict | None) -> Pose:
    if node is None:
        return Pose.identity()
    return Pose.from_xyz_rpy(node.get("xyz", (0, 0, 0)), node.get("rpy", (0, 0, 0)))


def task_from_dict(doc: dict, origin: str = "<dict>") -> TaskSpec:
    try:
        templates = []
        for node in doc["objects"]:
            rnd = node.get("randomize", {}) or {}
            templates.append(
                ObjectTemplate(
                    obj=SceneObject(
                        id=str(node["id"]),
                        shape=str(node["shape"]),
                        dims=tuple(node["dims"]),
                        pose=_pose_from_node(node.get("pose")),
                        graspable=bool(node.get("graspable", False)),
                        color=tuple(node.get("color", (128, 128, 128))),
                    ),
                    xy_jitter=float(rnd.get("xy_jitter", 0.0)),
                    yaw_jitter=float(rnd.get("yaw_jitter", 0.0)),
                )
            )
        clauses = []
        for node in doc.get("success", ()):
            region = node["in_region"]
            clauses.append(
                SuccessClause(
                    object_id=str(node["object"]),
                    center=tuple(float(v) for v in region["center"]),
                    half_extents=tuple(float(v) for v in region["half_extents"]),
                    require_released=bool(node.get("require_released", True)),
                )
            )
        start = doc.get("start", {}) or {}
        return TaskSpec(
            name=str(doc["name"]),
            templates=tuple(templates),
            success=tuple(clauses),
            time_limit=float(doc.get("time_limit", 120.0)),
            embodiment=str(doc.get("embodiment", "tiago_like")),
            start_base=tuple(float(v) for v in start.get("base", (0.0, 0.0, 0.0))),
        )
    except KeyError as exc:
        raise ConfigError(f"missing field {exc} in task", path=origin) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed task: {exc}", path=origin) from exc


def load_task(name_or_path: str) -> TaskSpec:
    """Load a bundled task by name, or any YAML file by path."""
    if name_or_path.endswith((".yaml", ".yml")):
        with open(name_or_path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        return task_from_dict(doc, origin=name_or_path)
    ref = resources.files("wbteleop").joinpath(f"data/tasks/{name_or_path}.yaml")
    if not ref.is_file():
        raise ConfigError(f"unknown task {name_or_path!r}")
    doc = yaml.safe_load(ref.read_text(encoding="utf-8"))
    return task_from_dict(doc, origin=str(ref))


def bundled_tasks() -> list[str]:
    root = resources.files("wbteleop").joinpath("data/tasks")
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))
