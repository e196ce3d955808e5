"""Synthetic RGB-D rendering by analytic ray casting.

Pinhole cameras (square pixels, vertical FOV from the embodiment's camera
spec) cast one ray per pixel against every scene primitive; the nearest hit
wins.  Rays are parameterized so the ray parameter *is* the z-depth: in the
optical frame each direction has z = 1, hence hit depth = t directly.
Depth images are 16-bit millimeters with 0 = no hit; RGB is flat-shaded with
a headlight Lambert term, so geometry is visible from any pose without a
scene lighting setup.

``render_observation`` also fills proprioception: EE poses in the base
frame, gripper positions, odometry delta relative to the previous base pose
(expressed in the previous base frame), and sim time.
"""
from __future__ import annotations

import math

import numpy as np

from ..channel.observation import ObservationFrame
from ..geometry import Pose, quat_to_matrix, wrap_angle
from ..robot.embodiment import CameraSpec, EmbodimentSpec
from ..robot.kinematics import forward_kinematics
from .world import SceneObject, WorldState, base_pose

BACKGROUND = np.array([18, 22, 28], dtype=np.uint8)
AMBIENT = 0.25
MAX_DEPTH_MM = 65535


def _camera_rays(cam: CameraSpec) -> np.ndarray:
    """(h, w, 3) ray directions in the optical frame, z component = 1."""
    f = (cam.height / 2.0) / math.tan(math.radians(cam.vfov_deg) / 2.0)
    cx = (cam.width - 1) / 2.0
    cy = (cam.height - 1) / 2.0
    u = (np.arange(cam.width) - cx) / f
    v = (np.arange(cam.height) - cy) / f
    uu, vv = np.meshgrid(u, v)
    return np.stack([uu, vv, np.ones_like(uu)], axis=-1)


def _hit_sphere(o, d, obj: SceneObject):
    r = obj.dims[0]
    oc = o - np.array(obj.pose.position)
    a = np.sum(d * d, axis=-1)
    b = 2.0 * np.sum(d * oc, axis=-1)
    c = float(oc @ oc) - r * r
    disc = b * b - 4.0 * a * c
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t = (-b - sq) / (2.0 * a)
    ok &= t > 1e-9
    hit = o + t[..., None] * d
    n = (hit - np.array(obj.pose.position)) / r
    return ok, t, n


def _to_local(o, d, obj: SceneObject):
    rot = quat_to_matrix(obj.pose.orientation)
    ol = (o - np.array(obj.pose.position)) @ rot  # R^T applied from the right
    dl = d @ rot
    return ol, dl, rot


def _hit_box(o, d, obj: SceneObject):
    ol, dl, rot = _to_local(o, d, obj)
    half = np.array(obj.dims)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dl
        lo = (-half - ol) * inv
        hi = (half - ol) * inv
    # rays parallel to a slab: hit iff the origin lies between its faces
    inside = np.abs(ol) <= half
    parallel = dl == 0.0
    lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
    tmin = np.max(np.minimum(lo, hi), axis=-1)
    tmax = np.min(np.maximum(lo, hi), axis=-1)
    ok = (tmax >= tmin) & (tmin > 1e-9)
    t = np.where(ok, tmin, 0.0)
    hit_local = ol + t[..., None] * dl
    # face normal: the axis where the hit touches a face
    scaled = np.abs(hit_local) / half
    axis = np.argmax(scaled, axis=-1)
    n_local = np.zeros_like(hit_local)
    idx = np.indices(axis.shape)
    n_local[(*idx, axis)] = np.sign(hit_local[(*idx, axis)])
    n = n_local @ rot.T
    return ok, t, n


def _hit_cylinder(o, d, obj: SceneObject):
    r, hh, _ = obj.dims
    ol, dl, rot = _to_local(o, d, obj)
    ox, oy, oz = ol[..., 0], ol[..., 1], ol[..., 2]
    dx, dy, dz = dl[..., 0], dl[..., 1], dl[..., 2]

    a = dx * dx + dy * dy
    b = 2.0 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - r * r
    disc = b * b - 4.0 * a * c
    side_possible = (disc >= 0.0) & (a > 1e-12)
    sq = np.sqrt(np.where(side_possible, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_side = np.where(side_possible, (-b - sq) / (2.0 * a), np.inf)
    z_at = oz + t_side * dz
    side_ok = side_possible & (t_side > 1e-9) & (np.abs(z_at) <= hh)
    t_side = np.where(side_ok, t_side, np.inf)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_top = (hh - oz) / dz
        t_bot = (-hh - oz) / dz
    caps = []
    for t_cap, zn in ((t_top, 1.0), (t_bot, -1.0)):
        xc = ox + t_cap * dx
        yc = oy + t_cap * dy
        cap_ok = (t_cap > 1e-9) & (xc * xc + yc * yc <= r * r) & np.isfinite(t_cap)
        caps.append((np.where(cap_ok, t_cap, np.inf), zn))

    t = t_side
    normal_kind = np.zeros(t.shape)  # 0 side, +1 top, -1 bottom
    for t_cap, zn in caps:
        closer = t_cap < t
        t = np.where(closer, t_cap, t)
        normal_kind = np.where(closer, zn, normal_kind)
    ok = np.isfinite(t)
    t_safe = np.where(ok, t, 0.0)

    hit_local = ol + t_safe[..., None] * dl
    n_side = hit_local.copy()
    n_side[..., 2] = 0.0
    norm = np.linalg.norm(n_side, axis=-1, keepdims=True)
    n_side = np.divide(n_side, norm, out=np.zeros_like(n_side), where=norm > 1e-12)
    n_cap = np.zeros_like(hit_local)
    n_cap[..., 2] = normal_kind
    n_local = np.where((normal_kind == 0.0)[..., None], n_side, n_cap)
    n = n_local @ rot.T
    return ok, t_safe, n


_HIT_FUNCS = {"sphere": _hit_sphere, "box": _hit_box, "cylinder": _hit_cylinder}


def render_camera(state: WorldState, cam: CameraSpec, cam_pose: Pose):
    """(rgb (h,w,3) u8, depth (h,w) u16 mm) for one camera."""
    rays_cam = _camera_rays(cam)
    rot = quat_to_matrix(cam_pose.orientation)
    d = rays_cam @ rot.T
    o = np.array(cam_pose.position)

    depth = np.full(rays_cam.shape[:2], np.inf)
    rgb = np.tile(BACKGROUND, (*rays_cam.shape[:2], 1)).astype(np.float64)
    dn = d / np.linalg.norm(d, axis=-1, keepdims=True)

    for obj in state.objects:
        ok, t, n = _HIT_FUNCS[obj.shape](o, d, obj)
        closer = ok & (t < depth)
        if not closer.any():
            continue
        lambert = np.clip(-np.sum(dn * n, axis=-1), 0.0, 1.0)
        shade = AMBIENT + (1.0 - AMBIENT) * lambert
        color = shade[..., None] * np.array(obj.color, dtype=np.float64)
        depth = np.where(closer, t, depth)
        rgb = np.where(closer[..., None], color, rgb)

    hit = np.isfinite(depth)
    depth_mm = np.zeros(depth.shape, dtype=np.uint16)
    mm = np.round(np.where(hit, depth, 0.0) * 1000.0)
    depth_mm[hit] = np.clip(mm[hit], 1, MAX_DEPTH_MM).astype(np.uint16)
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8), depth_mm


def render_observation(
    state: WorldState,
    spec: EmbodimentSpec,
    prev_base: tuple[float, float, float] | None = None,
) -> ObservationFrame:
    bp = base_pose(state)
    rgb = {}
    depth = {}
    for cam in spec.cameras:
        r, dd = render_camera(state, cam, bp.transform(cam.mount))
        rgb[cam.id] = r
        depth[cam.id] = dd

    ee_poses = {
        side: forward_kinematics(chain, state.joints.arms[side])
        for side, chain in spec.arms.items()
    }
    grip = state.joints.grippers
    gripper_state = (grip.get("left", 0.0), grip.get("right", 0.0))

    if prev_base is None:
        odom = (0.0, 0.0, 0.0)
    else:
        px, py, pth = prev_base
        x, y, th = state.base
        wx, wy = x - px, y - py
        c, s = math.cos(pth), math.sin(pth)
        odom = (c * wx + s * wy, -s * wx + c * wy, wrap_angle(th - pth))

    return ObservationFrame(
        sim_time=state.sim_time,
        base_odom_delta=odom,
        gripper_state=gripper_state,
        ee_poses=ee_poses,
        rgb=rgb,
        depth=depth,
    )
