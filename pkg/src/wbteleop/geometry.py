"""Rigid-body geometry: unit quaternions, rotation vectors, poses, pose deltas.

Conventions shared by every module in this package:

* quaternions are scalar-first ``(w, x, y, z)``, unit norm, and canonicalized
  to the ``w >= 0`` hemisphere so serialization is bit-stable
* rotation vectors are ``axis * angle`` in radians with magnitude <= pi
* arm motion deltas are expressed in the robot base frame at command time
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

QUAT_NORM_TOL = 1e-9


def _as_vec3(v) -> Vec3:
    x, y, z = v
    return (float(x), float(y), float(z))


def quat_norm(q: Quat) -> float:
    w, x, y, z = q
    return math.sqrt(w * w + x * x + y * y + z * z)


def quat_normalize(q: Quat) -> Quat:
    n = quat_norm(q)
    if n < 1e-12 or not math.isfinite(n):
        raise ValueError(f"cannot normalize degenerate quaternion {q!r}")
    w, x, y, z = q
    if abs(n - 1.0) <= 1e-12:
        # already unit: return unchanged so normalization is bitwise
        # idempotent (decoding a stored pose must not perturb it)
        return (float(w), float(x), float(y), float(z))
    return (w / n, x / n, y / n, z / n)


def quat_canonical(q: Quat) -> Quat:
    """Flip sign so w >= 0; ties (w == 0) resolved by first nonzero component."""
    w, x, y, z = q
    if w < 0.0:
        return (-w, -x, -y, -z)
    if w == 0.0:
        for c in (x, y, z):
            if c != 0.0:
                if c < 0.0:
                    return (w, -x, -y, -z)
                break
    return q


def quat_multiply(a: Quat, b: Quat) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_conjugate(q: Quat) -> Quat:
    w, x, y, z = q
    return (w, -x, -y, -z)


def quat_rotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate vector v by unit quaternion q (q v q*)."""
    w, x, y, z = q
    vx, vy, vz = v
    # t = 2 * (q_vec x v)
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    # v' = v + w*t + q_vec x t
    return (
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    )


def quat_from_axis_angle(axis: Vec3, angle: float) -> Quat:
    ax, ay, az = axis
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    s = math.sin(half) / n
    return quat_canonical((math.cos(half), ax * s, ay * s, az * s))


def quat_from_rotvec(r: Vec3) -> Quat:
    rx, ry, rz = r
    angle = math.sqrt(rx * rx + ry * ry + rz * rz)
    half = 0.5 * angle
    if angle < 1e-9:
        # sin(half)/angle ~ 0.5 - angle^2/48
        s = 0.5 - angle * angle / 48.0
    else:
        s = math.sin(half) / angle
    return quat_canonical(quat_normalize((math.cos(half), rx * s, ry * s, rz * s)))


def quat_to_rotvec(q: Quat) -> Vec3:
    """Log map to a rotation vector; canonical hemisphere keeps magnitude <= pi."""
    w, x, y, z = quat_canonical(quat_normalize(q))
    s = math.sqrt(x * x + y * y + z * z)
    if s < 1e-9:
        scale = 2.0 + s * s / 3.0  # series of 2*atan2(s, w)/s near s=0
    else:
        scale = 2.0 * math.atan2(s, w) / s
    return (x * scale, y * scale, z * scale)


def quat_angle_between(a: Quat, b: Quat) -> float:
    """Geodesic angle in radians between two orientations."""
    rel = quat_multiply(a, quat_conjugate(b))
    rx, ry, rz = quat_to_rotvec(rel)
    return math.sqrt(rx * rx + ry * ry + rz * rz)


def quat_to_matrix(q: Quat) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(m: np.ndarray) -> Quat:
    """Shepperd's method; input must be a proper rotation matrix."""
    t = float(m[0, 0] + m[1, 1] + m[2, 2])
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        q = (0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = ((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s)
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s)
    return quat_canonical(quat_normalize(q))


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t > math.pi:
        t -= 2.0 * math.pi
    elif t <= -math.pi:
        t += 2.0 * math.pi
    return t


def wrap_rotvec(r: Vec3) -> Vec3:
    """Reduce a rotation vector to the equivalent one with magnitude <= pi."""
    rx, ry, rz = r
    angle = math.sqrt(rx * rx + ry * ry + rz * rz)
    if angle <= math.pi:
        return (float(rx), float(ry), float(rz))
    wrapped = wrap_angle(angle)
    scale = wrapped / angle
    return (rx * scale, ry * scale, rz * scale)


@dataclass(frozen=True)
class Pose:
    """World-frame rigid transform: position in meters, unit quaternion (w,x,y,z)."""

    position: Vec3 = (0.0, 0.0, 0.0)
    orientation: Quat = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        pos = _as_vec3(self.position)
        if not all(math.isfinite(c) for c in pos):
            raise ValueError(f"non-finite position {pos!r}")
        q = quat_canonical(quat_normalize(tuple(float(c) for c in self.orientation)))
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", q)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_xyz_rpy(xyz, rpy) -> "Pose":
        """Build from translation and intrinsic roll-pitch-yaw (x, then y, then z)."""
        roll, pitch, yaw = (float(a) for a in rpy)
        qx = quat_from_axis_angle((1.0, 0.0, 0.0), roll)
        qy = quat_from_axis_angle((0.0, 1.0, 0.0), pitch)
        qz = quat_from_axis_angle((0.0, 0.0, 1.0), yaw)
        return Pose(_as_vec3(xyz), quat_multiply(qz, quat_multiply(qy, qx)))

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Pose":
        return Pose(_as_vec3(m[:3, 3]), matrix_to_quat(m[:3, :3]))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.orientation)
        m[:3, 3] = self.position
        return m

    def transform(self, other: "Pose") -> "Pose":
        """Compose: self then other expressed in self's frame."""
        px, py, pz = quat_rotate(self.orientation, other.position)
        sx, sy, sz = self.position
        return Pose(
            (sx + px, sy + py, sz + pz),
            quat_multiply(self.orientation, other.orientation),
        )

    def transform_point(self, p: Vec3) -> Vec3:
        rx, ry, rz = quat_rotate(self.orientation, p)
        sx, sy, sz = self.position
        return (sx + rx, sy + ry, sz + rz)

    def inverse(self) -> "Pose":
        qi = quat_conjugate(self.orientation)
        px, py, pz = quat_rotate(qi, self.position)
        return Pose((-px, -py, -pz), qi)


@dataclass(frozen=True)
class DeltaPose:
    """Per-tick relative displacement: translation (m) + rotation vector (rad)."""

    translation: Vec3 = (0.0, 0.0, 0.0)
    rotation: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        t = _as_vec3(self.translation)
        if not all(math.isfinite(c) for c in t):
            raise ValueError(f"non-finite translation {t!r}")
        r = wrap_rotvec(_as_vec3(self.rotation))
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @staticmethod
    def zero() -> "DeltaPose":
        return DeltaPose()

    def is_zero(self) -> bool:
        return self.translation == (0.0, 0.0, 0.0) and self.rotation == (0.0, 0.0, 0.0)

    def scaled(self, translation_gain: float, rotation_gain: float) -> "DeltaPose":
        tx, ty, tz = self.translation
        rx, ry, rz = self.rotation
        return DeltaPose(
            (tx * translation_gain, ty * translation_gain, tz * translation_gain),
            (rx * rotation_gain, ry * rotation_gain, rz * rotation_gain),
        )

    def as_vector(self) -> np.ndarray:
        """6-vector [translation; rotation], the twist layout used by the IK solver."""
        return np.array([*self.translation, *self.rotation])

    @staticmethod
    def from_vector(v) -> "DeltaPose":
        if len(v) != 6:
            raise ValueError(f"expected 6 entries, got {len(v)}")
        return DeltaPose((v[0], v[1], v[2]), (v[3], v[4], v[5]))

    def then(self, later: "DeltaPose") -> "DeltaPose":
        """Net displacement of applying self first and later second."""
        tx, ty, tz = self.translation
        lx, ly, lz = later.translation
        q = quat_multiply(quat_from_rotvec(later.rotation), quat_from_rotvec(self.rotation))
        return DeltaPose((tx + lx, ty + ly, tz + lz), quat_to_rotvec(q))


def compose_delta(prev: Pose, cur: Pose) -> DeltaPose:
    """Displacement that carries prev to cur, expressed in the fixed reference frame."""
    px, py, pz = prev.position
    cx, cy, cz = cur.position
    rel = quat_multiply(cur.orientation, quat_conjugate(prev.orientation))
    return DeltaPose((cx - px, cy - py, cz - pz), quat_to_rotvec(rel))


def apply_delta(pose: Pose, d: DeltaPose) -> Pose:
    """Inverse of compose_delta: apply_delta(p, compose_delta(p, c)) == c."""
    px, py, pz = pose.position
    tx, ty, tz = d.translation
    return Pose(
        (px + tx, py + ty, pz + tz),
        quat_multiply(quat_from_rotvec(d.rotation), pose.orientation),
    )
