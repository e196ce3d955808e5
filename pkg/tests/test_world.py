"""Kinematic world: SDF oracles, base arcs, grasp constraint, state hash."""
import math

import pytest

from wbteleop.actions import BaseVelocity
from wbteleop.geometry import Pose
from wbteleop.robot.embodiment import spec_from_dict
from wbteleop.robot.mapping import JointState, RobotCommand
from wbteleop.sim.world import (
    GRASP_RANGE,
    SceneObject,
    WorldState,
    _integrate_base,
    base_pose,
    canonical_state_bytes,
    fnv1a64,
    hand_pose,
    set_grasp,
    state_hash,
    step,
    surface_distance,
)

DT = 0.05


def stick_spec(arms=("right",), base_type="omnidirectional"):
    """One revolute z joint per arm; EE at (0.5, +-0.1 or 0, 0.5) at home."""
    arm_nodes = {}
    for side in arms:
        y = {"right": -0.1, "left": 0.1}[side] if len(arms) == 2 else 0.0
        arm_nodes[side] = {
            "mount": {"xyz": [0.2, y, 0.5]},
            "tip": {"xyz": [0.3, 0.0, 0.0]},
            "home": [0.0],
            "joints": [{"name": "j1", "type": "revolute", "axis": [0, 0, 1],
                        "limits": [-3.0, 3.0], "max_velocity": 2.0}],
        }
    return spec_from_dict({
        "name": "stick",
        "base_type": base_type,
        "arms": arm_nodes,
        "torso": {"range": [0.0, 0.4], "max_velocity": 0.1},
        "gripper_speed": 2.0,
    })


def sphere(x=0.0, y=0.0, z=0.0, r=0.5, graspable=False, oid="ball"):
    return SceneObject(oid, "sphere", (r, 0.0, 0.0), Pose((x, y, z)),
                       graspable=graspable)


def world(spec, objects=(), base=(0.0, 0.0, 0.0), grippers=None):
    joints = JointState.home(spec)
    if grippers is not None:
        joints = JointState(arms=joints.arms, torso=joints.torso,
                            grippers=dict(grippers))
    return WorldState(base=base, joints=joints, objects=tuple(objects))


def hold(state):
    return RobotCommand.hold(state.joints)


def test_scene_object_validation():
    with pytest.raises(ValueError, match="shape"):
        SceneObject("x", "cone", (1, 1, 1), Pose())
    with pytest.raises(ValueError, match="dims"):
        SceneObject("x", "box", (1, -1, 1), Pose())
    with pytest.raises(ValueError, match="color"):
        SceneObject("x", "box", (1, 1, 1), Pose(), color=(0, 300, 0))


def test_object_by_id():
    w = WorldState(objects=(sphere(oid="a"), sphere(oid="b")))
    assert w.object_by_id("b").id == "b"
    with pytest.raises(KeyError):
        w.object_by_id("c")


def test_base_pose_from_tuple():
    p = base_pose(WorldState(base=(1.0, 2.0, math.pi / 2)))
    assert p.position == (1.0, 2.0, 0.0)
    assert p.transform_point((1.0, 0.0, 0.0)) == pytest.approx((1.0, 3.0, 0.0))


def test_sphere_surface_distance():
    s = sphere(r=0.5)
    assert surface_distance(s, (1.0, 0.0, 0.0)) == pytest.approx(0.5)
    assert surface_distance(s, (0.0, 0.0, 0.0)) == pytest.approx(-0.5)
    assert surface_distance(s, (0.5, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)


def test_box_surface_distance():
    b = SceneObject("b", "box", (0.5, 0.4, 0.3), Pose())
    assert surface_distance(b, (1.0, 0.0, 0.0)) == pytest.approx(0.5)
    assert surface_distance(b, (0.0, 0.0, 0.0)) == pytest.approx(-0.3)
    corner = surface_distance(b, (1.0, 1.0, 1.0))
    assert corner == pytest.approx(math.sqrt(0.5**2 + 0.6**2 + 0.7**2))


def test_rotated_box_surface_distance():
    pose = Pose.from_xyz_rpy((0, 0, 0), (0, 0, math.pi / 4))
    b = SceneObject("b", "box", (0.1, 0.1, 0.1), pose)
    # along world x the rotated box presents its edge at sqrt(2)*0.1
    d = surface_distance(b, (1.0, 0.0, 0.0))
    assert d == pytest.approx(1.0 - math.sqrt(2) * 0.1)


def test_cylinder_surface_distance():
    c = SceneObject("c", "cylinder", (0.3, 0.5, 0.0), Pose())
    assert surface_distance(c, (1.0, 0.0, 0.0)) == pytest.approx(0.7)
    assert surface_distance(c, (0.0, 0.0, 1.0)) == pytest.approx(0.5)
    assert surface_distance(c, (0.0, 0.0, 0.0)) == pytest.approx(-0.3)
    assert surface_distance(c, (1.0, 0.0, 0.8)) == pytest.approx(math.hypot(0.7, 0.3))


def test_straight_line_integration():
    assert _integrate_base((0, 0, 0), 1.0, 0.0, 0.0, 0.05) == pytest.approx((0.05, 0, 0))
    # heading rotates the body-frame velocity into the world
    x, y, th = _integrate_base((0, 0, math.pi / 2), 1.0, 0.0, 0.0, 0.05)
    assert (x, y) == pytest.approx((0.0, 0.05), abs=1e-12)
    x, y, th = _integrate_base((0, 0, 0), 0.0, 1.0, 0.0, 0.05)
    assert (x, y) == pytest.approx((0.0, 0.05), abs=1e-12)


def test_arc_integration_quarter_circle():
    # vx=1, wz=pi/2 for 1s: quarter arc of radius 2/pi
    x, y, th = _integrate_base((0, 0, 0), 1.0, 0.0, math.pi / 2, 1.0)
    assert th == pytest.approx(math.pi / 2)
    assert (x, y) == pytest.approx((2 / math.pi, 2 / math.pi), abs=1e-12)


def test_arc_matches_euler_limit():
    # closed form against many tiny Euler steps
    fine = (0.0, 0.0, 0.0)
    n = 20000
    for _ in range(n):
        x, y, th = fine
        fine = (x + 0.3 * math.cos(th) / n, y + 0.3 * math.sin(th) / n, th + 0.8 / n)
    coarse = _integrate_base((0, 0, 0), 0.3, 0.0, 0.8, 1.0)
    assert coarse == pytest.approx(fine, abs=1e-4)


def test_step_rejects_bad_dt():
    spec = stick_spec()
    w = world(spec)
    for dt in (0.0, -0.01, 0.2):
        with pytest.raises(ValueError):
            step(w, hold(w), dt, spec)


def test_step_advances_time_and_base():
    spec = stick_spec()
    w = world(spec)
    cmd = RobotCommand.hold(w.joints)
    cmd = RobotCommand(cmd.arm_targets, cmd.gripper_targets,
                       BaseVelocity(0.4, 0.2, 0.0), cmd.torso_target)
    w2 = step(w, cmd, DT, spec)
    assert w2.sim_time == pytest.approx(0.05)
    assert w2.base == pytest.approx((0.02, 0.01, 0.0))  # omnidirectional: vy acts


def test_step_zeroes_vy_on_differential_base():
    spec = stick_spec(base_type="differential")
    w = world(spec)
    cmd = RobotCommand(dict(w.joints.arms), dict(w.joints.grippers),
                       BaseVelocity(0.0, 0.5, 0.0), w.joints.torso)
    w2 = step(w, cmd, DT, spec)
    assert w2.base == pytest.approx((0.0, 0.0, 0.0))


def test_arm_rate_limited_toward_target():
    spec = stick_spec()
    w = world(spec)
    cmd = RobotCommand({"right": (1.0,)}, dict(w.joints.grippers),
                       BaseVelocity.zero(), w.joints.torso)
    w2 = step(w, cmd, DT, spec)
    assert w2.joints.arms["right"] == pytest.approx((0.1,))  # 2.0 rad/s * 0.05
    w3 = step(w2, RobotCommand({"right": (0.12,)}, {}, BaseVelocity.zero(), None),
              DT, spec)
    assert w3.joints.arms["right"] == pytest.approx((0.12,))  # within reach: lands


def test_arm_clamped_to_limits():
    spec = stick_spec()
    w = WorldState(joints=JointState(arms={"right": (2.95,)}, grippers={"right": 0.0}))
    cmd = RobotCommand({"right": (5.0,)}, {}, BaseVelocity.zero(), None)
    w2 = step(w, cmd, DT, spec)
    assert w2.joints.arms["right"] == (3.0,)  # limit, not 3.05


def test_torso_rate_limited_and_clamped():
    spec = stick_spec()
    w = world(spec)
    cmd = RobotCommand(dict(w.joints.arms), {}, BaseVelocity.zero(), 9.0)
    w2 = step(w, cmd, DT, spec)
    assert w2.joints.torso == pytest.approx(0.005)  # 0.1 m/s * 0.05, goal clamped
    assert step(w2, cmd, DT, spec).joints.torso == pytest.approx(0.01)


def test_gripper_moves_at_gripper_speed():
    spec = stick_spec()
    w = world(spec)
    cmd = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    w2 = step(w, cmd, DT, spec)
    assert w2.joints.grippers["right"] == pytest.approx(0.1)  # 2.0 /s * 0.05


def test_grasp_engages_on_threshold_crossing():
    spec = stick_spec()
    pot = sphere(x=0.55, y=0.0, z=0.5, r=0.05, graspable=True, oid="pot")
    w = world(spec, [pot], grippers={"right": 0.45})
    ee = hand_pose(w, spec, "right")
    assert surface_distance(pot, ee.position) <= GRASP_RANGE
    cmd = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    w2 = step(w, cmd, DT, spec)  # 0.45 -> 0.55 crosses 0.5
    assert "right" in w2.grasps
    assert w2.grasps["right"][0] == "pot"


def test_no_grasp_when_out_of_range():
    spec = stick_spec()
    far = sphere(x=2.0, y=0.0, z=0.5, r=0.05, graspable=True)
    w = world(spec, [far], grippers={"right": 0.45})
    cmd = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    assert step(w, cmd, DT, spec).grasps == {}


def test_non_graspable_ignored():
    spec = stick_spec()
    fixed = sphere(x=0.55, y=0.0, z=0.5, r=0.05, graspable=False)
    w = world(spec, [fixed], grippers={"right": 0.45})
    cmd = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    assert step(w, cmd, DT, spec).grasps == {}


def test_held_object_rides_the_hand():
    spec = stick_spec()
    pot = sphere(x=0.55, y=0.0, z=0.5, r=0.05, graspable=True, oid="pot")
    w = world(spec, [pot], grippers={"right": 0.45})
    cmd = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    w = step(w, cmd, DT, spec)
    assert "right" in w.grasps
    # drive forward; the held object must translate with the base
    drive = RobotCommand(dict(w.joints.arms), {"right": 1.0},
                         BaseVelocity(0.4, 0.0, 0.0), None)
    before = w.object_by_id("pot").pose.position
    w = step(w, drive, DT, spec)
    after = w.object_by_id("pot").pose.position
    assert after[0] - before[0] == pytest.approx(0.02, abs=1e-12)
    assert after[1:] == pytest.approx(before[1:], abs=1e-12)


def test_release_keeps_object_pose():
    spec = stick_spec()
    pot = sphere(x=0.55, y=0.0, z=0.5, r=0.05, graspable=True, oid="pot")
    w = world(spec, [pot], grippers={"right": 0.45})
    close = RobotCommand(dict(w.joints.arms), {"right": 1.0}, BaseVelocity.zero(), None)
    w = step(w, close, DT, spec)
    open_cmd = RobotCommand(dict(w.joints.arms), {"right": 0.0}, BaseVelocity.zero(), None)
    w = step(w, open_cmd, DT, spec)  # 0.55 -> 0.45 crosses 0.5 downward
    assert w.grasps == {}
    dropped = w.object_by_id("pot").pose.position
    # further motion leaves the released object behind
    drive = RobotCommand(dict(w.joints.arms), {"right": 0.0},
                         BaseVelocity(0.5, 0.0, 0.0), None)
    w = step(w, drive, DT, spec)
    assert w.object_by_id("pot").pose.position == dropped


def test_second_hand_cannot_steal_a_held_object():
    spec = stick_spec(arms=("left", "right"))
    pot = sphere(x=0.5, y=0.0, z=0.5, r=0.08, graspable=True, oid="pot")
    w = world(spec, [pot])
    for side in ("left", "right"):
        assert surface_distance(pot, hand_pose(w, spec, side).position) <= GRASP_RANGE
    w = set_grasp(w, spec, "left", True)
    assert w.grasps["left"][0] == "pot"
    w = set_grasp(w, spec, "right", True)
    assert "right" not in w.grasps


def test_set_grasp_noop_cases():
    spec = stick_spec()
    w = world(spec)
    assert set_grasp(w, spec, "right", False) is w  # nothing held
    assert set_grasp(w, spec, "right", True).grasps == {}  # nothing in range


def test_fnv1a64_known_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_state_hash_sensitivity():
    spec = stick_spec()
    w = world(spec, [sphere()])
    assert state_hash(w) == state_hash(world(spec, [sphere()]))
    moved = world(spec, [sphere()], base=(1e-9, 0.0, 0.0))
    assert state_hash(moved) != state_hash(w)
    recolored = world(spec, [sphere()])
    recolored = WorldState(
        base=recolored.base, joints=recolored.joints,
        objects=(SceneObject("ball", "sphere", (0.5, 0, 0), Pose(),
                             color=(1, 2, 3)),),
    )
    assert state_hash(recolored) != state_hash(w)


def test_canonical_bytes_are_stable_across_dict_order():
    spec = stick_spec(arms=("left", "right"))
    joints_a = JointState(arms={"left": (0.1,), "right": (0.2,)},
                          grippers={"left": 0.0, "right": 1.0})
    joints_b = JointState(arms={"right": (0.2,), "left": (0.1,)},
                          grippers={"right": 1.0, "left": 0.0})
    a = WorldState(joints=joints_a)
    b = WorldState(joints=joints_b)
    assert canonical_state_bytes(a) == canonical_state_bytes(b)
