"""Kinematic world simulation: stepping, grasping, rendering, tasks."""
from .render import AMBIENT, BACKGROUND, render_camera, render_observation
from .tasks import (
    ObjectTemplate,
    SuccessClause,
    TaskSpec,
    bundled_tasks,
    check_task,
    load_task,
    task_from_dict,
)
from .world import (
    GRASP_RANGE,
    GRIP_THRESHOLD,
    SceneObject,
    WorldState,
    base_pose,
    canonical_state_bytes,
    fnv1a64,
    hand_pose,
    set_grasp,
    state_hash,
    step,
    surface_distance,
)

__all__ = [
    "AMBIENT",
    "BACKGROUND",
    "GRASP_RANGE",
    "GRIP_THRESHOLD",
    "ObjectTemplate",
    "SceneObject",
    "SuccessClause",
    "TaskSpec",
    "WorldState",
    "base_pose",
    "bundled_tasks",
    "canonical_state_bytes",
    "check_task",
    "fnv1a64",
    "hand_pose",
    "load_task",
    "render_camera",
    "render_observation",
    "set_grasp",
    "state_hash",
    "step",
    "surface_distance",
    "task_from_dict",
]
