"""Damped least squares differential inverse kinematics.

One step resolves a task-space twist (6-vector [translation; rotation
vector]) into joint deltas:

    dq = J^T (J J^T + lambda^2 I)^-1 * twist

The damping keeps solutions bounded at singular configurations at the cost
of some tracking error; the default lambda = 0.05 suits operator-in-the-loop
rates.  Steps are clamped twice: per-joint velocity x dt, then hard joint
limits — an emitted configuration never violates either.
"""
from __future__ import annotations

import numpy as np

from ..geometry import DeltaPose, Pose, apply_delta, compose_delta
from .embodiment import Chain
from .kinematics import forward_kinematics, jacobian

DEFAULT_LAMBDA = 0.05


def damped_ls(J: np.ndarray, twist: np.ndarray, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    if lam <= 0:
        raise ValueError(f"damping must be positive, got {lam}")
    JJt = J @ J.T
    return J.T @ np.linalg.solve(JJt + (lam * lam) * np.eye(JJt.shape[0]), twist)


def diff_ik_step(
    chain: Chain,
    q: np.ndarray,
    target_delta: DeltaPose,
    lam: float = DEFAULT_LAMBDA,
    dt: float | None = None,
) -> np.ndarray:
    """One damped step toward the given EE displacement; returns new q.

    With ``dt`` given, each joint moves at most max_velocity * dt this step.
    The result is always inside joint limits.
    """
    q = np.asarray(q, dtype=float)
    dq = damped_ls(jacobian(chain, q), target_delta.as_vector(), lam)
    if dt is not None:
        caps = np.array([j.max_velocity for j in chain.joints]) * dt
        dq = np.clip(dq, -caps, caps)
    lo = np.array([j.limits[0] for j in chain.joints])
    hi = np.array([j.limits[1] for j in chain.joints])
    return np.clip(q + dq, lo, hi)


def track_target(
    chain: Chain,
    q: np.ndarray,
    target: Pose,
    lam: float = DEFAULT_LAMBDA,
    max_iterations: int = 3,
    residual_tol: float = 1e-4,
    dt: float | None = None,
) -> np.ndarray:
    """Iterate diff_ik_step toward a target EE pose (inner loop of one tick).

    Stops early when the remaining twist norm drops below ``residual_tol``.
    With ``dt`` given, the velocity budget applies to the tick as a whole,
    not per inner iteration.
    """
    q = np.asarray(q, dtype=float)
    q_start = q
    caps = (
        np.array([j.max_velocity for j in chain.joints]) * dt if dt is not None else None
    )
    for _ in range(max_iterations):
        err = compose_delta(forward_kinematics(chain, q), target)
        twist = err.as_vector()
        if np.linalg.norm(twist) < residual_tol:
            break
        dq = damped_ls(jacobian(chain, q), twist, lam)
        q_new = q + dq
        if caps is not None:
            q_new = q_start + np.clip(q_new - q_start, -caps, caps)
        lo = np.array([j.limits[0] for j in chain.joints])
        hi = np.array([j.limits[1] for j in chain.joints])
        q = np.clip(q_new, lo, hi)
    return q


def ee_error(chain: Chain, q, target: Pose) -> tuple[float, float]:
    """(translation error m, rotation error rad) between FK(q) and target."""
    d = compose_delta(forward_kinematics(chain, q), target)
    return (
        float(np.linalg.norm(d.translation)),
        float(np.linalg.norm(d.rotation)),
    )


def displace_target(chain: Chain, q, delta: DeltaPose) -> Pose:
    """The EE target pose reached by applying ``delta`` to the current FK."""
    return apply_delta(forward_kinematics(chain, q), delta)
