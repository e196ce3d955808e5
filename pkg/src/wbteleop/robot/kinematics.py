"""Forward kinematics and the geometric Jacobian for serial chains.

Everything is expressed in the robot base frame (the same frame arm delta
commands use).  FK is the ordered product of per-joint transforms:

    T = mount * prod_i (origin_i * motion_i(q_i)) * tip

where motion is a rotation about the joint axis (revolute) or a translation
along it (prismatic).  The Jacobian is the classic geometric construction:
revolute columns [z x (p_ee - p_joint); z], prismatic columns [z; 0].
"""
from __future__ import annotations

import numpy as np

from ..geometry import Pose, quat_from_axis_angle
from .embodiment import Chain


class LimitError(ValueError):
    """Joint positions outside the chain's declared limits."""


def check_limits(chain: Chain, q, tol: float = 1e-9) -> None:
    if len(q) != chain.dof:
        raise LimitError(f"chain {chain.name!r} has {chain.dof} joints, got {len(q)} values")
    for qi, joint in zip(q, chain.joints):
        lo, hi = joint.limits
        if not (lo - tol <= qi <= hi + tol):
            raise LimitError(
                f"joint {joint.name!r}: {qi} outside [{lo}, {hi}]"
            )


def clamp_to_limits(chain: Chain, q) -> np.ndarray:
    lo = np.array([j.limits[0] for j in chain.joints])
    hi = np.array([j.limits[1] for j in chain.joints])
    return np.clip(np.asarray(q, dtype=float), lo, hi)


def _joint_motion(joint, qi: float) -> Pose:
    if joint.type == "revolute":
        return Pose((0.0, 0.0, 0.0), quat_from_axis_angle(joint.axis, qi))
    ax, ay, az = joint.axis
    return Pose((ax * qi, ay * qi, az * qi))


def _frames(chain: Chain, q) -> list[Pose]:
    """Pose of every joint frame (pre-motion) plus the EE frame, base frame."""
    frames = []
    cur = chain.mount
    for joint, qi in zip(chain.joints, q):
        cur = cur.transform(joint.origin)
        frames.append(cur)  # joint frame: origin applied, motion not yet
        cur = cur.transform(_joint_motion(joint, qi))
    frames.append(cur.transform(chain.tip))  # EE frame
    return frames


def forward_kinematics(chain: Chain, q) -> Pose:
    """EE pose in the base frame; raises LimitError outside joint limits."""
    check_limits(chain, q)
    return _frames(chain, q)[-1]


def jacobian(chain: Chain, q) -> np.ndarray:
    """6 x dof geometric Jacobian at q, rows [linear; angular], base frame."""
    check_limits(chain, q)
    frames = _frames(chain, q)
    p_ee = np.array(frames[-1].position)
    cols = []
    for joint, frame in zip(chain.joints, frames[:-1]):
        z = np.array(frame.transform_point(joint.axis)) - np.array(frame.position)
        if joint.type == "revolute":
            lever = p_ee - np.array(frame.position)
            cols.append(np.concatenate([np.cross(z, lever), z]))
        else:
            cols.append(np.concatenate([z, np.zeros(3)]))
    return np.column_stack(cols)
