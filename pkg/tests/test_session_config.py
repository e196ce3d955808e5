"""Session configuration loading and the operator rig."""
import pytest

from wbteleop.channel.latency import LatencyModel
from wbteleop.interfaces.config import ConfigError
from wbteleop.interfaces.events import InputEvent, KeyInput, write_event_file
from wbteleop.session import (
    OperatorRig,
    SessionConfig,
    load_session_config,
    parse_endpoint,
    session_config_from_dict,
)

FULL_DOC = """
task: pick_pot
seed: 11
ticks_per_second: 25
devices:
  - id: kb
    type: keyboard
    keymap: {w: base.vx+, s: base.vx-}
    config: {base_linear_gain: 0.5}
  - id: pad
    type: sixdof
    config: {deadband: 0.1}
assignment:
  base: kb
  arms: pad
latency: "150,50,0.0,7"
record: /tmp/out.tmep
script: /tmp/in.ndjson
ws_port: 8900
endpoint: "10.0.0.5:7000"
max_ticks: 400
"""


def test_defaults():
    cfg = SessionConfig()
    assert cfg.task == "pick_pot"
    assert cfg.ticks_per_second == 20
    assert cfg.tick_us == 50_000
    assert cfg.devices == ()
    assert cfg.latency is None


def test_tick_us_rounds():
    assert SessionConfig(ticks_per_second=30).tick_us == 33_333
    assert SessionConfig(ticks_per_second=1000).tick_us == 1_000


@pytest.mark.parametrize("rate", [0, -5, 1001])
def test_tick_rate_bounds(rate):
    with pytest.raises(ConfigError):
        SessionConfig(ticks_per_second=rate)


def test_full_document(tmp_path):
    path = tmp_path / "session.yaml"
    path.write_text(FULL_DOC)
    cfg = load_session_config(path)
    assert cfg.task == "pick_pot"
    assert cfg.seed == 11
    assert cfg.ticks_per_second == 25
    assert [d.id for d in cfg.devices] == ["kb", "pad"]
    assert cfg.devices[0].kind == "keyboard"
    assert cfg.devices[0].keymap == {"w": "base.vx+", "s": "base.vx-"}
    assert cfg.devices[0].config.base_linear_gain == 0.5
    assert cfg.devices[1].config.deadband == 0.1
    assert cfg.assignment["base"] == "kb"
    assert cfg.assignment["left_arm"] == "pad"
    assert cfg.assignment["right_arm"] == "pad"
    assert "right_gripper" not in cfg.assignment  # arms alias is arms only
    assert cfg.latency == LatencyModel(150.0, 50.0, 0.0, 7)
    assert cfg.record_path == "/tmp/out.tmep"
    assert cfg.script_path == "/tmp/in.ndjson"
    assert cfg.ws_port == 8900
    assert cfg.endpoint == ("10.0.0.5", 7000)
    assert cfg.max_ticks == 400


def test_unknown_setting_names_file_and_line(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("task: pick_pot\nturbo: yes\n")
    with pytest.raises(ConfigError) as exc_info:
        load_session_config(path)
    text = str(exc_info.value)
    assert "turbo" in text
    assert f"{path}:2" in text


def test_duplicate_yaml_key_rejected(tmp_path):
    path = tmp_path / "dup.yaml"
    path.write_text("seed: 1\nseed: 2\n")
    with pytest.raises(ConfigError, match="duplicate key"):
        load_session_config(path)


def test_invalid_yaml_reports_line(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("task: [unclosed\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_session_config(path)


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigError, match="mapping"):
        session_config_from_dict(["not", "a", "dict"])  # type: ignore[arg-type]


def test_device_requires_id_and_type():
    with pytest.raises(ConfigError, match="missing 'type'"):
        session_config_from_dict({"devices": [{"id": "kb"}]})
    with pytest.raises(ConfigError, match="missing 'id'"):
        session_config_from_dict({"devices": [{"type": "keyboard"}]})


def test_duplicate_device_id():
    doc = {"devices": [{"id": "kb", "type": "keyboard", "keymap": {}},
                       {"id": "kb", "type": "sixdof"}]}
    with pytest.raises(ConfigError, match="duplicate device id"):
        session_config_from_dict(doc)


def test_unknown_parser_option():
    doc = {"devices": [{"id": "p", "type": "sixdof", "config": {"warp": 9}}]}
    with pytest.raises(ConfigError, match="unknown parser option"):
        session_config_from_dict(doc)


def test_assignment_rejects_unknown_device():
    doc = {"devices": [{"id": "pad", "type": "sixdof"}],
           "assignment": {"base": "ghost"}}
    with pytest.raises(ConfigError, match="unknown device"):
        session_config_from_dict(doc)


def test_bad_latency_string():
    with pytest.raises(ConfigError, match="bad latency"):
        session_config_from_dict({"latency": "a,b,c"})


def test_parse_endpoint():
    assert parse_endpoint("127.0.0.1:8734") == ("127.0.0.1", 8734)
    assert parse_endpoint("[::1]:99") == ("[::1]", 99)
    for bad in ("nocolon", ":8080", "host:port"):
        with pytest.raises(ConfigError):
            parse_endpoint(bad)


# -- operator rig ------------------------------------------------------------


def rig_config(tmp_path, events):
    script = tmp_path / "script.ndjson"
    write_event_file(script, events)
    doc = {
        "devices": [
            {"id": "kb", "type": "keyboard",
             "keymap": {"w": "base.vx+", "q": "left_gripper"}},
        ],
        "assignment": {"base": "kb", "grippers": "kb"},
        "script": str(script),
    }
    cfg = session_config_from_dict(doc)
    return SessionConfig(
        task=cfg.task, devices=cfg.devices, assignment=cfg.assignment,
        script_path=cfg.script_path,
    )


def test_rig_replays_script_by_timestamp(tmp_path):
    events = [
        InputEvent("kb", 10_000, KeyInput("w", True)),
        InputEvent("kb", 80_000, KeyInput("w", False)),
    ]
    rig = OperatorRig(rig_config(tmp_path, events))
    held = rig.pump(50_000)
    assert "base" in held.present_fields()
    assert held.base.vx == 1.0
    released = rig.pump(100_000)  # release edge: one explicit stop
    assert released.base == held.base.__class__.zero() or released.base.vx == 0.0
    assert rig.exhausted
    assert rig.pump(150_000).is_empty()


def test_rig_counts_unknown_devices(tmp_path):
    events = [InputEvent("ghost", 0, KeyInput("w", True))]
    rig = OperatorRig(rig_config(tmp_path, events))
    rig.pump(10_000)
    assert rig.unknown_events == 1


def test_rig_merge_respects_assignment(tmp_path):
    # gripper key is mapped and assigned: it must come through merged
    events = [InputEvent("kb", 0, KeyInput("q", True))]
    rig = OperatorRig(rig_config(tmp_path, events))
    merged = rig.pump(10_000)
    assert merged.left_gripper == 1.0
    assert merged.sources["left_gripper"] == "kb"
