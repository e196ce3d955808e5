"""Assignment expansion and per-tick merging of device partials."""
import pytest

from wbteleop.actions import ActionCommand, BaseVelocity, tag_all
from wbteleop.geometry import DeltaPose
from wbteleop.interfaces import build_parser
from wbteleop.interfaces.composite import expand_assignment, merge
from wbteleop.interfaces.config import ConfigError, ParserConfig
from wbteleop.interfaces.keyboard import KeyboardParser
from wbteleop.interfaces.sixdof import SixDofParser
from wbteleop.interfaces.vision import VisionParser
from wbteleop.interfaces.vr import VrParser


def partial(device, t=0, **fields):
    return ActionCommand(timestamp=t, sources=dict.fromkeys(fields, device), **fields)


def test_expand_group_aliases():
    out = expand_assignment({"arms": "vr", "grippers": "vr", "base": "kb"})
    assert out == {
        "left_arm": "vr", "right_arm": "vr",
        "left_gripper": "vr", "right_gripper": "vr",
        "base": "kb",
    }


def test_expand_rejects_unknown_part():
    with pytest.raises(ConfigError, match="unknown body part"):
        expand_assignment({"head": "kb"})


def test_expand_rejects_double_claim():
    with pytest.raises(ConfigError, match="assigned to both"):
        expand_assignment({"arms": "vr", "left_arm": "kb"})


def test_expand_checks_device_references():
    with pytest.raises(ConfigError, match="unknown device"):
        expand_assignment({"base": "pad"}, known_devices={"kb", "vr"})
    out = expand_assignment({"base": "kb"}, known_devices={"kb"})
    assert out == {"base": "kb"}


def test_merge_takes_fields_from_assigned_device():
    a = expand_assignment({"base": "kb", "left_arm": "vr"})
    kb = partial("kb", base=BaseVelocity(1, 0, 0))
    vr = partial("vr", left_arm=DeltaPose((0.1, 0, 0)))
    cmd = merge([kb, vr], a, timestamp=42)
    assert cmd.base == BaseVelocity(1, 0, 0)
    assert cmd.left_arm == DeltaPose((0.1, 0, 0))
    assert cmd.timestamp == 42
    assert cmd.sources == {"base": "kb", "left_arm": "vr"}


def test_merge_drops_unassigned_fields():
    a = expand_assignment({"base": "kb"})
    kb = partial("kb", base=BaseVelocity.zero(), torso=0.5)  # torso not assigned
    cmd = merge([kb], a, timestamp=0)
    assert cmd.base is not None
    assert cmd.torso is None


def test_merge_ignores_field_from_wrong_device():
    a = expand_assignment({"base": "kb", "torso": "puck"})
    kb = partial("kb", base=BaseVelocity(0.5, 0, 0), torso=1.0)
    cmd = merge([kb], a, timestamp=0)
    assert cmd.base == BaseVelocity(0.5, 0, 0)
    assert cmd.torso is None  # kb's torso opinion is not puck's


def test_merge_with_missing_device_partial():
    a = expand_assignment({"base": "kb", "left_arm": "vr"})
    cmd = merge([partial("kb", base=BaseVelocity.zero())], a, timestamp=9)
    assert cmd.base is not None
    assert cmd.left_arm is None


def test_merge_of_nothing_is_empty():
    cmd = merge([], expand_assignment({"base": "kb"}), timestamp=3)
    assert cmd.is_empty()
    assert cmd.timestamp == 3


def test_empty_partials_are_invisible():
    a = expand_assignment({"base": "kb"})
    cmd = merge([ActionCommand.empty(0)], a, timestamp=0)
    assert cmd.is_empty()


def test_merge_full_rig():
    a = expand_assignment({
        "arms": "vr", "grippers": "vr", "base": "kb", "torso": "puck",
    })
    vr = partial("vr", left_arm=DeltaPose((0.01, 0, 0)),
                 right_arm=DeltaPose((0, 0.01, 0)),
                 left_gripper=1.0, right_gripper=0.0)
    kb = partial("kb", base=BaseVelocity(0.3, 0, 0))
    puck = partial("puck", torso=0.25)
    cmd = merge([vr, kb, puck], a, timestamp=100)
    assert cmd.present_fields() == (
        "left_arm", "right_arm", "left_gripper", "right_gripper", "base", "torso",
    )
    assert all(cmd.sources[p] == d for p, d in a.items())


def test_tag_all_partial_feeds_merge():
    fields = {"base": BaseVelocity(1, 0, 0), "torso": 0.5}
    p = tag_all(fields, "dev", 5)
    cmd = merge([p], expand_assignment({"base": "dev", "torso": "dev"}), timestamp=5)
    assert cmd.base == BaseVelocity(1, 0, 0)
    assert cmd.torso == 0.5


def test_build_parser_dispatch():
    assert isinstance(build_parser("keyboard", "kb", keymap={"w": "base.vx"}), KeyboardParser)
    assert isinstance(build_parser("sixdof", "p"), SixDofParser)
    assert isinstance(build_parser("vr", "v"), VrParser)
    assert isinstance(build_parser("vision", "c", ParserConfig(smoothing=0.5)), VisionParser)


def test_build_parser_rejects_unknown_and_bare_keyboard():
    with pytest.raises(ConfigError):
        build_parser("gamepad", "x")
    with pytest.raises(ConfigError):
        build_parser("keyboard", "kb")
