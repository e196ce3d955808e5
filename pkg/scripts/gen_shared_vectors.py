#!/usr/bin/env python3
"""Regenerate the binary test vectors under tests/vectors/.

The vectors pin the externally visible byte formats: the flat action
vector, full action payloads, a compressed observation frame, and a frame
stream with embedded garbage for resynchronization checks.  Both the
Python suite and the web console tests read these files, so the two
implementations are checked against the same bytes.

Everything here is hand-picked constants — no randomness — so rerunning
the script is a no-op unless a format actually changed.
"""
from __future__ import annotations

import argparse
import json
import zlib
from pathlib import Path

import numpy as np

from wbteleop.actions import ActionCommand, BaseVelocity, flatten
from wbteleop.channel.observation import ObservationFrame, compress_observation
from wbteleop.channel.wire import (
    MSG_ACTION,
    MSG_CONTROL,
    MSG_HEARTBEAT,
    MSG_OBSERVATION,
    encode_command,
    encode_frame,
    encode_heartbeat,
)
from wbteleop.geometry import DeltaPose, Pose
from wbteleop.interfaces.config import ParserConfig
from wbteleop.interfaces.events import InputEvent, KeyInput
from wbteleop.interfaces.keyboard import KeyboardParser

# Every float below is exactly representable in binary32 so the files are
# stable across platforms and languages.
GOLDEN_COMMAND = ActionCommand(
    left_arm=DeltaPose((1.0, -0.5, 0.25), (0.125, -0.125, 0.0625)),
    right_arm=DeltaPose((-1.0, 0.5, -0.25), (-0.0625, 0.03125, -0.03125)),
    left_gripper=0.75,
    right_gripper=0.5,
    base=BaseVelocity(1.5, -0.75, 0.375),
    torso=0.5,
    timestamp=1_234_567,
    sources={
        "left_arm": "kb",
        "right_arm": "vr",
        "left_gripper": "kb",
        "right_gripper": "vr",
        "base": "puck",
        "torso": "puck",
    },
)

PARTIAL_COMMANDS = [
    ActionCommand(timestamp=0),
    ActionCommand(
        base=BaseVelocity(0.5, 0.0, -0.25),
        timestamp=50_000,
        sources={"base": "kb"},
    ),
    ActionCommand(
        right_arm=DeltaPose((0.0078125, 0.0, -0.015625), (0.0, 0.03125, 0.0)),
        right_gripper=1.0,
        timestamp=2_000_000,
        sources={"right_arm": "vision", "right_gripper": "vision"},
    ),
    ActionCommand(
        torso=0.875,
        timestamp=123_456_789,
        sources={"torso": "puck"},
    ),
]


def _gradient_rgb(w: int, h: int) -> np.ndarray:
    img = np.zeros((h, w, 3), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            img[y, x] = ((x * 31) % 256, (y * 57) % 256, (x + y * w) % 256)
    return img


def _stripe_depth(w: int, h: int) -> np.ndarray:
    img = np.zeros((h, w), dtype=np.uint16)
    for y in range(h):
        for x in range(w):
            img[y, x] = 0 if (x + y) % 5 == 0 else 400 + 100 * x + 7 * y
    return img


def golden_observation() -> ObservationFrame:
    return ObservationFrame(
        sim_time=3.25,
        base_odom_delta=(0.03125, -0.015625, 0.0625),
        gripper_state=(0.25, 1.0),
        ee_poses={
            "left": Pose((0.5, 0.25, 1.0), (1.0, 0.0, 0.0, 0.0)),
            "right": Pose((0.5, -0.25, 1.0), (0.0, 0.0, 0.0, 1.0)),
        },
        rgb={"head": _gradient_rgb(8, 6)},
        depth={"head": _stripe_depth(8, 6)},
    )


def command_expectation(cmd: ActionCommand) -> dict:
    out: dict = {"timestamp": cmd.timestamp, "sources": dict(cmd.sources)}
    if cmd.left_arm is not None:
        out["left_arm"] = [*cmd.left_arm.translation, *cmd.left_arm.rotation]
    if cmd.right_arm is not None:
        out["right_arm"] = [*cmd.right_arm.translation, *cmd.right_arm.rotation]
    if cmd.left_gripper is not None:
        out["left_gripper"] = cmd.left_gripper
    if cmd.right_gripper is not None:
        out["right_gripper"] = cmd.right_gripper
    if cmd.base is not None:
        out["base"] = [cmd.base.vx, cmd.base.vy, cmd.base.wz]
    if cmd.torso is not None:
        out["torso"] = cmd.torso
    return out


# The bundled keyboard bindings and gains, frozen here so the web console's
# key handling can be checked byte-for-byte against the native parser.
KEYBOARD_CONFIG = {
    "base_linear_gain": 0.6,
    "base_angular_gain": 1.0471975511965976,
    "translation_gain": 0.01,
    "rotation_gain": 0.05,
    "torso_gain": 0.02,
}
KEYBOARD_KEYMAP = {
    "w": "base.vx+", "s": "base.vx-",
    "a": "base.vy+", "d": "base.vy-",
    "q": "base.wz+", "e": "base.wz-",
    "i": "right_arm.x+", "k": "right_arm.x-",
    "j": "right_arm.y+", "l": "right_arm.y-",
    "u": "right_arm.z+", "o": "right_arm.z-",
    "g": "right_gripper",
    "t": "torso+", "b": "torso-",
}
KEYBOARD_STEPS = [
    # drive forward while turning, reach, close the gripper, raise the torso
    {"events": [["w", True], ["q", True], ["i", True], ["t", True],
                ["g", True], ["g", False]],
     "tick": 250_000},
    # releasing both base keys must emit an explicit stop, not silence
    {"events": [["w", False], ["q", False]], "tick": 300_000},
]


def keyboard_payloads() -> list[bytes]:
    parser = KeyboardParser("kb", dict(KEYBOARD_KEYMAP), ParserConfig(**KEYBOARD_CONFIG))
    out = []
    for step in KEYBOARD_STEPS:
        for code, pressed in step["events"]:
            parser.feed(InputEvent("kb", step["tick"], KeyInput(code, pressed)))
        out.append(encode_command(parser.tick(step["tick"])))
    return out


def build_frame_stream() -> tuple[bytes, list[dict]]:
    """A byte stream with garbage between frames; decoding must recover
    exactly the listed frames."""
    garbage = bytes((i * 37 + 11) % 256 for i in range(1024))
    frames = [
        (MSG_ACTION, encode_command(GOLDEN_COMMAND)),
        (MSG_HEARTBEAT, encode_heartbeat(42_000_000)),
        (MSG_OBSERVATION, compress_observation(golden_observation())),
        (MSG_CONTROL, json.dumps({"kind": "done", "success": True}).encode()),
    ]
    stream = bytearray()
    stream += encode_frame(*frames[0])
    stream += garbage
    stream += encode_frame(*frames[1])
    stream += b"TM\x07junk-that-looks-like-a-header\x00"
    stream += encode_frame(*frames[2])
    stream += encode_frame(*frames[3])
    expected = [
        {"msg_type": t, "payload_len": len(p), "payload_crc32": zlib.crc32(p)}
        for t, p in frames
    ]
    return bytes(stream), expected


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parent.parent / "tests" / "vectors"),
        help="output directory",
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # 1. the flat 17-slot vector for the fully populated command
    vec = flatten(GOLDEN_COMMAND)
    (out / "action_vector.bin").write_bytes(vec.tobytes())
    (out / "action_vector.json").write_text(
        json.dumps({"slots": [float(v) for v in vec]}, indent=2) + "\n"
    )

    # 2. complete action payloads, fully populated and partial
    payloads = []
    for i, cmd in enumerate([GOLDEN_COMMAND, *PARTIAL_COMMANDS]):
        payload = encode_command(cmd)
        name = f"action_payload_{i:02d}.bin"
        (out / name).write_bytes(payload)
        payloads.append(
            {"file": name, "crc32": zlib.crc32(payload), **command_expectation(cmd)}
        )
    (out / "action_payloads.json").write_text(json.dumps(payloads, indent=2) + "\n")

    # 3. one compressed observation frame plus its decoded ground truth
    obs = golden_observation()
    payload = compress_observation(obs)
    (out / "observation_frame.bin").write_bytes(payload)
    expect = {
        "sim_time": obs.sim_time,
        "base_odom_delta": list(obs.base_odom_delta),
        "gripper_state": list(obs.gripper_state),
        "ee_poses": {
            name: {"position": list(p.position), "orientation": list(p.orientation)}
            for name, p in obs.ee_poses.items()
        },
        "rgb": {
            cam: {
                "width": img.shape[1],
                "height": img.shape[0],
                "raw_hex": img.tobytes().hex(),
            }
            for cam, img in obs.rgb.items()
        },
        "depth": {
            cam: {
                "width": img.shape[1],
                "height": img.shape[0],
                "raw_hex": img.astype("<u2").tobytes().hex(),
            }
            for cam, img in obs.depth.items()
        },
    }
    (out / "observation_frame.json").write_text(json.dumps(expect, indent=2) + "\n")

    # 4. frame stream with garbage for resynchronization tests
    stream, expected = build_frame_stream()
    (out / "frame_stream.bin").write_bytes(stream)
    (out / "frame_stream.json").write_text(json.dumps(expected, indent=2) + "\n")

    # 5. keyboard parity: scripted key events -> encoded command payloads
    kb_meta = {
        "device_id": "kb",
        "config": KEYBOARD_CONFIG,
        "keymap": KEYBOARD_KEYMAP,
        "steps": [],
    }
    for i, (step, payload) in enumerate(zip(KEYBOARD_STEPS, keyboard_payloads())):
        name = f"keyboard_command_{i}.bin"
        (out / name).write_bytes(payload)
        kb_meta["steps"].append(
            {"events": step["events"], "tick": step["tick"], "file": name,
             "crc32": zlib.crc32(payload)}
        )
    (out / "keyboard_commands.json").write_text(json.dumps(kb_meta, indent=2) + "\n")

    print(f"wrote vectors to {out}")


if __name__ == "__main__":
    main()
