"""Framing, checksum validation, resynchronization, and the command codec."""
import math
import random
import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbteleop.actions import ActionCommand, BaseVelocity
from wbteleop.channel.wire import (
    HEADER_LEN,
    MAX_PAYLOAD,
    MSG_ACTION,
    MSG_CONTROL,
    MSG_HEARTBEAT,
    MSG_OBSERVATION,
    FrameDecoder,
    IntegrityError,
    decode_command,
    decode_frame,
    decode_heartbeat,
    encode_command,
    encode_frame,
    encode_heartbeat,
)
from wbteleop.geometry import DeltaPose


def f32(x: float) -> float:
    return float(np.float32(x))


def random_command(rng: random.Random) -> ActionCommand:
    """Command with a random subset of fields, values already f32-exact."""
    fields: dict = {}
    sources: dict = {}

    def maybe(name, value, p=0.6):
        if rng.random() < p:
            fields[name] = value
            sources[name] = rng.choice(["kb", "vr", "puck", "vision", "policy"])

    def small_rotvec():
        r = [rng.uniform(-1.0, 1.0) for _ in range(3)]
        n = math.sqrt(sum(c * c for c in r))
        if n >= math.pi:
            r = [c * 2.0 / n for c in r]
        return tuple(f32(c) for c in r)

    maybe("left_arm", DeltaPose(
        tuple(f32(rng.uniform(-0.1, 0.1)) for _ in range(3)), small_rotvec()))
    maybe("right_arm", DeltaPose(
        tuple(f32(rng.uniform(-0.1, 0.1)) for _ in range(3)), small_rotvec()))
    maybe("left_gripper", f32(rng.random()))
    maybe("right_gripper", f32(rng.random()))
    maybe("base", BaseVelocity(*(f32(rng.uniform(-2, 2)) for _ in range(3))))
    maybe("torso", f32(rng.random()))
    return ActionCommand(
        timestamp=rng.randrange(0, 1 << 48), sources=sources, **fields)


# --- frame layer -------------------------------------------------------------


def test_frame_header_layout():
    frame = encode_frame(MSG_HEARTBEAT, b"\x01\x02")
    assert frame[:2] == b"TM"
    assert frame[2] == 1  # version
    assert frame[3] == MSG_HEARTBEAT
    assert struct.unpack_from("<I", frame, 4)[0] == 2
    assert struct.unpack_from("<I", frame, 8)[0] == zlib.crc32(b"\x01\x02")
    assert len(frame) == HEADER_LEN + 2


def test_encode_frame_rejects_bad_input():
    with pytest.raises(ValueError):
        encode_frame(9, b"")
    with pytest.raises(ValueError):
        encode_frame(MSG_ACTION, b"x" * (MAX_PAYLOAD + 1))


@given(st.sampled_from([MSG_ACTION, MSG_OBSERVATION, MSG_HEARTBEAT, MSG_CONTROL]),
       st.binary(max_size=2048))
def test_frame_round_trip(msg_type, payload):
    assert decode_frame(encode_frame(msg_type, payload)) == (msg_type, payload)


def test_decode_frame_rejects_malformed():
    good = encode_frame(MSG_CONTROL, b"hello")
    with pytest.raises(IntegrityError):
        decode_frame(good[:5])  # truncated header
    with pytest.raises(IntegrityError):
        decode_frame(b"XX" + good[2:])  # magic
    with pytest.raises(IntegrityError):
        decode_frame(good[:2] + b"\x07" + good[3:])  # version
    with pytest.raises(IntegrityError):
        decode_frame(good[:3] + b"\x09" + good[4:])  # msg_type
    with pytest.raises(IntegrityError):
        decode_frame(good + b"extra")  # length mismatch
    corrupt = good[:-1] + bytes([good[-1] ^ 0x01])
    with pytest.raises(IntegrityError):
        decode_frame(corrupt)  # crc


def test_single_bit_flips_in_payload_always_detected(rng):
    # the crc covers the payload; a one-bit payload error must never decode
    payload = bytes(rng.randrange(256) for _ in range(64))
    frame = encode_frame(MSG_OBSERVATION, payload)
    for i in range(HEADER_LEN, len(frame)):
        for bit in range(8):
            corrupted = bytearray(frame)
            corrupted[i] ^= 1 << bit
            with pytest.raises(IntegrityError):
                decode_frame(bytes(corrupted))


def test_bit_flips_in_crc_or_length_detected(rng):
    frame = encode_frame(MSG_OBSERVATION, bytes(range(32)))
    for i in range(4, HEADER_LEN):  # payload_len and crc fields
        corrupted = bytearray(frame)
        corrupted[i] ^= 1 << rng.randrange(8)
        with pytest.raises(IntegrityError):
            decode_frame(bytes(corrupted))


# --- incremental decoder ------------------------------------------------------


def test_decoder_handles_arbitrary_chunking(rng):
    frames = [
        (MSG_ACTION, bytes([i]) * (i + 1)) for i in range(10)
    ]
    stream = b"".join(encode_frame(t, p) for t, p in frames)
    dec = FrameDecoder()
    got = []
    i = 0
    while i < len(stream):
        n = rng.randrange(1, 7)
        got.extend(dec.feed(stream[i : i + n]))
        i += n
    assert got == frames
    assert dec.integrity_errors == 0
    assert dec.dropped_bytes == 0


@given(st.lists(st.binary(max_size=64), min_size=1, max_size=8), st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_decoder_recovers_all_frames_regardless_of_split(payloads, seed):
    frames = [(MSG_CONTROL, p) for p in payloads]
    stream = b"".join(encode_frame(t, p) for t, p in frames)
    rng = random.Random(seed)
    dec = FrameDecoder()
    got = []
    i = 0
    while i < len(stream):
        n = rng.randrange(1, 16)
        got.extend(dec.feed(stream[i : i + n]))
        i += n
    assert got == frames


def test_decoder_resynchronizes_after_garbage(rng):
    garbage = bytes(rng.randrange(256) for _ in range(1024))
    frame_a = encode_frame(MSG_HEARTBEAT, encode_heartbeat(1))
    frame_b = encode_frame(MSG_ACTION, b"payload")
    dec = FrameDecoder()
    got = dec.feed(frame_a + garbage + frame_b)
    assert got == [
        (MSG_HEARTBEAT, encode_heartbeat(1)),
        (MSG_ACTION, b"payload"),
    ]
    assert dec.dropped_bytes >= 1024
    assert dec.pending() == 0


def test_decoder_skips_corrupted_frame_and_continues():
    frame_a = bytearray(encode_frame(MSG_ACTION, b"first"))
    frame_a[HEADER_LEN] ^= 0xFF  # corrupt payload of the first frame
    frame_b = encode_frame(MSG_ACTION, b"second")
    dec = FrameDecoder()
    got = dec.feed(bytes(frame_a) + frame_b)
    assert got == [(MSG_ACTION, b"second")]
    assert dec.integrity_errors >= 1


def test_decoder_waits_for_partial_frame():
    frame = encode_frame(MSG_CONTROL, b"x" * 100)
    dec = FrameDecoder()
    assert dec.feed(frame[:50]) == []
    assert dec.feed(frame[50:]) == [(MSG_CONTROL, b"x" * 100)]


def test_decoder_rejects_bogus_length_without_stalling():
    # a fake header claiming a giant payload must not make the decoder wait
    fake = b"TM" + bytes([1, MSG_ACTION]) + struct.pack("<I", MAX_PAYLOAD + 5) + b"\x00" * 4
    real = encode_frame(MSG_HEARTBEAT, encode_heartbeat(7))
    dec = FrameDecoder()
    assert dec.feed(fake + real) == [(MSG_HEARTBEAT, encode_heartbeat(7))]


# --- heartbeat codec ---------------------------------------------------------


def test_heartbeat_round_trip():
    assert decode_heartbeat(encode_heartbeat(123456789)) == 123456789
    with pytest.raises(IntegrityError):
        decode_heartbeat(b"\x00" * 7)


# --- command codec -----------------------------------------------------------


def test_command_codec_full_round_trip():
    cmd = ActionCommand(
        left_arm=DeltaPose((0.25, -0.5, 0.125), (0.0625, 0.0, -0.03125)),
        right_arm=DeltaPose((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        left_gripper=1.0,
        right_gripper=0.0,
        base=BaseVelocity(0.5, -0.25, 0.75),
        torso=0.375,
        timestamp=42,
        sources={
            "left_arm": "a", "right_arm": "b", "left_gripper": "c",
            "right_gripper": "d", "base": "e", "torso": "f",
        },
    )
    assert decode_command(encode_command(cmd)) == cmd


def test_command_codec_preserves_absence():
    cmd = ActionCommand(torso=0.5, timestamp=1, sources={"torso": "t"})
    back = decode_command(encode_command(cmd))
    assert back == cmd
    assert back.left_arm is None and back.base is None


def test_empty_command_round_trip():
    cmd = ActionCommand.empty(987)
    back = decode_command(encode_command(cmd))
    assert back == cmd and back.is_empty()


def test_command_payload_is_byte_stable(rng):
    # decode . encode must be the identity on encoded payloads
    for _ in range(200):
        payload = encode_command(random_command(rng))
        assert encode_command(decode_command(payload)) == payload


def test_command_codec_random_round_trip(rng):
    for _ in range(300):
        cmd = random_command(rng)
        assert decode_command(encode_command(cmd)) == cmd


def test_decode_command_rejects_truncation():
    payload = encode_command(
        ActionCommand(base=BaseVelocity(1, 0, 0), timestamp=5, sources={"base": "kb"})
    )
    for cut in (10, 60, len(payload) - 1):
        with pytest.raises(IntegrityError):
            decode_command(payload[:cut])
    with pytest.raises(IntegrityError):
        decode_command(payload + b"\x00")  # trailing bytes


def test_source_tag_length_cap():
    cmd = ActionCommand(torso=0.5, timestamp=0, sources={"torso": "x" * 256})
    with pytest.raises(ValueError):
        encode_command(cmd)


def test_shared_action_payload_vectors(vector_dir):
    import json

    table = json.loads((vector_dir / "action_payloads.json").read_text())
    assert table, "vector table is empty"
    for entry in table:
        payload = (vector_dir / entry["file"]).read_bytes()
        assert zlib.crc32(payload) == entry["crc32"]
        cmd = decode_command(payload)
        assert cmd.timestamp == entry["timestamp"]
        assert cmd.sources == entry["sources"]
        if "base" in entry:
            assert [cmd.base.vx, cmd.base.vy, cmd.base.wz] == entry["base"]
        else:
            assert cmd.base is None
        if "left_arm" in entry:
            assert [*cmd.left_arm.translation, *cmd.left_arm.rotation] == entry["left_arm"]
        if "right_arm" in entry:
            assert [*cmd.right_arm.translation, *cmd.right_arm.rotation] == entry["right_arm"]
        for scalar in ("left_gripper", "right_gripper", "torso"):
            assert getattr(cmd, scalar) == entry.get(scalar)
        # and the codec reproduces the committed bytes exactly
        assert encode_command(cmd) == payload
