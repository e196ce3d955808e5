"""Embodiment mapping: consolidated commands -> joint-level robot commands.

Two stages, matching the hardware boundary:

* ``filter_unusable`` drops fields the embodiment cannot execute (second arm
  on a single-arm robot, torso on a fixed-torso robot, lateral velocity on a
  differential base) — counted, never an error;
* ``map_command`` resolves what remains: arm deltas through iterative damped
  least squares (bounded inner iterations per tick), normalized torso to the
  prismatic range, base and grippers clamped through.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..actions import ActionCommand, BaseVelocity, clamp
from ..geometry import DeltaPose
from .embodiment import EmbodimentSpec
from .ik import DEFAULT_LAMBDA, displace_target, track_target


@dataclass(frozen=True)
class JointState:
    """Kinematic robot state: arm configurations plus torso and grippers."""

    arms: dict[str, tuple[float, ...]] = field(default_factory=dict)
    torso: float = 0.0
    grippers: dict[str, float] = field(default_factory=dict)

    @staticmethod
    def home(spec: EmbodimentSpec) -> "JointState":
        return JointState(
            arms={side: chain.home for side, chain in spec.arms.items()},
            torso=spec.torso.range[0] if spec.torso else 0.0,
            grippers={side: 0.0 for side in spec.arms},
        )

    def arm(self, side: str) -> np.ndarray:
        return np.array(self.arms[side])


@dataclass(frozen=True)
class RobotCommand:
    """Joint-level targets the simulator integrates toward."""

    arm_targets: dict[str, tuple[float, ...]] = field(default_factory=dict)
    gripper_targets: dict[str, float] = field(default_factory=dict)
    base: BaseVelocity = field(default_factory=BaseVelocity.zero)
    torso_target: float | None = None

    @staticmethod
    def hold(state: JointState) -> "RobotCommand":
        return RobotCommand(
            arm_targets=dict(state.arms),
            gripper_targets=dict(state.grippers),
            base=BaseVelocity.zero(),
            torso_target=state.torso,
        )


def filter_unusable(
    cmd: ActionCommand, spec: EmbodimentSpec, counters: dict[str, int] | None = None
) -> ActionCommand:
    """Remove command fields with no corresponding hardware.  Idempotent."""

    def count(reason: str):
        if counters is not None:
            counters[reason] = counters.get(reason, 0) + 1

    drops = {}
    sources = dict(cmd.sources)
    for side in ("left", "right"):
        if not spec.has_arm(side):
            for name in (f"{side}_arm", f"{side}_gripper"):
                if getattr(cmd, name) is not None:
                    drops[name] = None
                    sources.pop(name)
                    count(f"no_{name}")
    if spec.torso is None and cmd.torso is not None:
        drops["torso"] = None
        sources.pop("torso")
        count("no_torso")

    base = cmd.base
    if base is not None and spec.base_type == "differential" and base.vy != 0.0:
        base = BaseVelocity(base.vx, 0.0, base.wz)
        drops["base"] = base
        count("nonholonomic_vy")

    if not drops:
        return cmd
    return replace(cmd, sources=sources, **drops)


def map_command(
    cmd: ActionCommand,
    state: JointState,
    spec: EmbodimentSpec,
    dt: float,
    lam: float = DEFAULT_LAMBDA,
    max_iterations: int = 3,
    residual_tol: float = 1e-4,
) -> RobotCommand:
    """Resolve a (filtered) command against the current state.

    Absent or zero fields hold the current position — mapping never invents
    motion.
    """
    arm_targets: dict[str, tuple[float, ...]] = {}
    for side, chain in spec.arms.items():
        q = state.arm(side)
        delta = getattr(cmd, f"{side}_arm")
        if delta is not None and not delta.is_zero():
            target = displace_target(chain, q, delta)
            q = track_target(
                chain,
                q,
                target,
                lam=lam,
                max_iterations=max_iterations,
                residual_tol=residual_tol,
                dt=dt,
            )
        arm_targets[side] = tuple(float(v) for v in q)

    gripper_targets: dict[str, float] = {}
    for side in spec.arms:
        g = getattr(cmd, f"{side}_gripper")
        gripper_targets[side] = (
            clamp(g, 0.0, 1.0) if g is not None else state.grippers.get(side, 0.0)
        )

    if cmd.base is not None:
        base = cmd.base.clamped(spec.max_linear_velocity, spec.max_angular_velocity)
        if spec.base_type == "differential":
            base = BaseVelocity(base.vx, 0.0, base.wz)
    else:
        base = BaseVelocity.zero()

    torso_target = None
    if spec.torso is not None:
        if cmd.torso is not None:
            lo, hi = spec.torso.range
            torso_target = lo + clamp(cmd.torso, 0.0, 1.0) * (hi - lo)
        else:
            torso_target = state.torso

    return RobotCommand(
        arm_targets=arm_targets,
        gripper_targets=gripper_targets,
        base=base,
        torso_target=torso_target,
    )
