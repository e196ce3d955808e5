"""Raycast renderer: pinhole geometry, z-depth semantics, shading, observation."""
import math

import numpy as np
import pytest

from wbteleop.geometry import Pose
from wbteleop.robot.embodiment import CameraSpec, load_embodiment
from wbteleop.robot.mapping import JointState
from wbteleop.sim.render import (
    AMBIENT,
    BACKGROUND,
    _camera_rays,
    render_camera,
    render_observation,
)
from wbteleop.sim.world import SceneObject, WorldState


def cam(width=3, height=3, vfov=90.0):
    return CameraSpec("test", position=(0.0, 0.0, 0.0), pitch_deg=0.0,
                      yaw_deg=0.0, width=width, height=height, vfov_deg=vfov)


def red_sphere(z=2.0, r=0.5):
    return SceneObject("ball", "sphere", (r, 0.0, 0.0), Pose((0.0, 0.0, z)),
                       color=(200, 0, 0))


def test_ray_grid_geometry():
    dirs = _camera_rays(cam(3, 3, 90.0))
    assert dirs.shape == (3, 3, 3)
    # center pixel looks straight down +z in optical frame
    assert dirs[1, 1] == pytest.approx([0.0, 0.0, 1.0])
    # all rays have unit z so the hit parameter t is the z-depth
    assert dirs[..., 2] == pytest.approx(np.ones((3, 3)))
    # vfov 90 with h=3: f = 1.5, corner offsets are (+-1)/1.5
    assert dirs[0, 0, 0] == pytest.approx(-1 / 1.5)
    assert dirs[0, 0, 1] == pytest.approx(-1 / 1.5)
    assert dirs[2, 2, 0] == pytest.approx(1 / 1.5)


def test_sphere_center_pixel_depth_and_color():
    rgb, depth = render_camera(WorldState(objects=(red_sphere(),)), cam(),
                               Pose.identity())
    assert rgb.dtype == np.uint8 and depth.dtype == np.uint16
    # center ray hits the near surface at z = 2.0 - 0.5
    assert depth[1, 1] == 1500
    # head-on: normal faces the camera, full lambert term
    expect = round((AMBIENT + (1 - AMBIENT) * 1.0) * 200)
    assert tuple(rgb[1, 1]) == (expect, 0, 0)


def test_miss_pixels_are_background():
    rgb, depth = render_camera(WorldState(objects=(red_sphere(r=0.05),)), cam(),
                               Pose.identity())
    assert depth[0, 0] == 0
    assert tuple(rgb[0, 0]) == tuple(BACKGROUND)


def test_depth_is_z_not_euclidean():
    # a fronto-parallel wall: every hit pixel reports the same plane depth even
    # though euclidean hit distance grows toward the image corners
    wall = SceneObject("wall", "box", (5.0, 5.0, 0.005), Pose((0.0, 0.0, 2.005)))
    _, depth = render_camera(WorldState(objects=(wall,)), cam(9, 9, 60.0),
                             Pose.identity())
    hits = depth[depth > 0]
    assert hits.size == 81
    assert np.all(hits == 2000)


def test_nearest_object_wins():
    near = SceneObject("near", "sphere", (0.3, 0, 0), Pose((0, 0, 1.5)),
                       color=(0, 255, 0))
    far = SceneObject("far", "sphere", (0.5, 0, 0), Pose((0, 0, 3.0)),
                      color=(0, 0, 255))
    rgb, depth = render_camera(WorldState(objects=(near, far)), cam(),
                               Pose.identity())
    assert depth[1, 1] == 1200
    assert rgb[1, 1, 1] > 0 and rgb[1, 1, 2] == 0


def test_oblique_shading_darker_than_head_on():
    rgb, depth = render_camera(WorldState(objects=(red_sphere(r=0.9),)),
                               cam(9, 9), Pose.identity())
    center = int(rgb[4, 4, 0])
    rim_rows, rim_cols = np.nonzero(depth > 0)
    edge = min(int(rgb[r, c, 0]) for r, c in zip(rim_rows, rim_cols))
    assert edge < center
    assert edge >= round(AMBIENT * 200) - 1  # ambient floor


def test_depth_clipped_to_range():
    far = SceneObject("far", "sphere", (0.5, 0, 0), Pose((0, 0, 80.0)))
    _, depth = render_camera(WorldState(objects=(far,)), cam(), Pose.identity())
    assert depth[1, 1] == 65535


def test_camera_pose_moves_the_view():
    # camera displaced +x one meter, sphere at origin+x: still dead ahead
    pose = Pose((1.0, 0.0, -2.0))
    ball = SceneObject("b", "sphere", (0.5, 0, 0), Pose((1.0, 0.0, 0.0)),
                       color=(10, 200, 10))
    _, depth = render_camera(WorldState(objects=(ball,)), cam(), pose)
    assert depth[1, 1] == 1500


def test_render_observation_shapes_and_keys():
    spec = load_embodiment("tiago_like")
    w = WorldState(joints=JointState.home(spec))
    obs = render_observation(w, spec)
    assert set(obs.rgb) == {c.id for c in spec.cameras}
    for c in spec.cameras:
        assert obs.rgb[c.id].shape == (c.height, c.width, 3)
        assert obs.depth[c.id].shape == (c.height, c.width)
    assert set(obs.ee_poses) == {"left", "right"}
    assert obs.gripper_state == (0.0, 0.0)
    assert obs.sim_time == 0.0


def test_render_observation_ee_in_base_frame():
    spec = load_embodiment("tiago_like")
    home = JointState.home(spec)
    at_origin = render_observation(WorldState(joints=home), spec)
    moved = render_observation(
        WorldState(base=(3.0, -1.0, 1.7), joints=home), spec)
    # end-effector poses are base-relative: independent of where the base is
    for side in ("left", "right"):
        a, b = at_origin.ee_poses[side], moved.ee_poses[side]
        assert a.position == pytest.approx(b.position)
        assert a.orientation == pytest.approx(b.orientation)


def test_odometry_delta_in_previous_base_frame():
    spec = load_embodiment("tiago_like")
    home = JointState.home(spec)
    prev = (1.0, 1.0, math.pi / 2)
    cur = WorldState(base=(1.0, 1.2, math.pi / 2), joints=home)
    obs = render_observation(cur, spec, prev_base=prev)
    # heading pi/2: a world +y displacement is straight ahead in-frame
    assert obs.base_odom_delta == pytest.approx((0.2, 0.0, 0.0), abs=1e-12)
    turned = WorldState(base=(1.0, 1.0, math.pi / 2 + 0.3), joints=home)
    obs = render_observation(turned, spec, prev_base=prev)
    assert obs.base_odom_delta == pytest.approx((0.0, 0.0, 0.3), abs=1e-12)


def test_odometry_zero_without_previous():
    spec = load_embodiment("tiago_like")
    obs = render_observation(WorldState(joints=JointState.home(spec)), spec)
    assert obs.base_odom_delta == (0.0, 0.0, 0.0)


def test_rendering_is_deterministic():
    spec = load_embodiment("tiago_like")
    w = WorldState(joints=JointState.home(spec), objects=(red_sphere(z=1.2),))
    a = render_observation(w, spec, prev_base=(0, 0, 0))
    b = render_observation(w, spec, prev_base=(0, 0, 0))
    assert a.equals(b)
