"""Modular whole-body teleoperation for simulated mobile manipulators.

Layers, from operator to robot:

* :mod:`wbteleop.interfaces` — device parsers turning raw input events
  (keyboard, 6-DoF puck, VR controllers, body tracking) into partial
  whole-body commands, plus the compositor that merges devices;
* :mod:`wbteleop.actions` — the command schema and its flat-vector layout;
* :mod:`wbteleop.channel` — wire framing, observation codec, per-tick
  consolidation, latency injection, TCP/WebSocket transports;
* :mod:`wbteleop.robot` — embodiment descriptions, kinematics, damped
  least-squares tracking, command-to-joint mapping;
* :mod:`wbteleop.sim` — the kinematic world, grasping, ray-cast rendering,
  task scenes and success predicates;
* :mod:`wbteleop.recorder` / :mod:`wbteleop.session` / :mod:`wbteleop.cli`
  — recording with bit-exact replay, the session loops, the entry point.
"""
from .actions import (
    ACTION_BYTES,
    ACTION_DIM,
    ActionCommand,
    BaseVelocity,
    PartialCommand,
    flatten,
    unflatten,
)
from .geometry import DeltaPose, Pose, apply_delta, compose_delta
from .version import __version__

__all__ = [
    "ACTION_BYTES",
    "ACTION_DIM",
    "ActionCommand",
    "BaseVelocity",
    "DeltaPose",
    "PartialCommand",
    "Pose",
    "__version__",
    "apply_delta",
    "compose_delta",
    "flatten",
    "unflatten",
]
