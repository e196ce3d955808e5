"""Checksummed binary framing and the action-command codec.

Frame layout (all integers little-endian):

    offset  size  field
    0       2     magic 0x54 0x4D ("TM")
    2       1     version (= 1)
    3       1     msg_type: 0 action, 1 observation, 2 heartbeat, 3 control
    4       4     payload_len: u32
    8       4     crc32 of payload: u32
    12      n     payload

The decoder is incremental and self-synchronizing: garbage between frames is
skipped by scanning for the next header whose magic, version, length bound,
and payload crc all check out.

Action payload layout:

    0   u64   command timestamp, monotonic microseconds
    8   u8    presence mask, bit i = field i of
              (left_arm, right_arm, left_gripper, right_gripper, base, torso)
    9   68    the flat 17-slot action vector, float32 LE (absent fields zero)
    77  f32   torso target (0.0 when absent)
    81  ...   per present field, in mask-bit order: u8 length + UTF-8 device id

Command numerics are float32 on the wire, exactly as in recordings.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ..actions import (
    ACTION_BYTES,
    ACTION_DTYPE,
    COMMAND_FIELDS,
    ActionCommand,
    BaseVelocity,
    flatten,
)
from ..geometry import DeltaPose

MAGIC = b"TM"
VERSION = 1
HEADER = struct.Struct("<2sBBII")
HEADER_LEN = HEADER.size  # 12

MSG_ACTION = 0
MSG_OBSERVATION = 1
MSG_HEARTBEAT = 2
MSG_CONTROL = 3
_MSG_TYPES = (MSG_ACTION, MSG_OBSERVATION, MSG_HEARTBEAT, MSG_CONTROL)

# Upper bound on a plausible payload; candidate headers claiming more are
# treated as line noise so resynchronization never stalls on a bogus length.
MAX_PAYLOAD = 16 * 1024 * 1024


class IntegrityError(ValueError):
    """Frame failed crc/magic/version validation."""


def encode_frame(msg_type: int, payload: bytes) -> bytes:
    if msg_type not in _MSG_TYPES:
        raise ValueError(f"bad msg_type {msg_type}")
    if len(payload) > MAX_PAYLOAD:
        raise ValueError(f"payload too large: {len(payload)}")
    return HEADER.pack(MAGIC, VERSION, msg_type, len(payload), zlib.crc32(payload)) + payload


def decode_frame(buf: bytes) -> tuple[int, bytes]:
    """Decode exactly one complete frame; raises on anything malformed."""
    if len(buf) < HEADER_LEN:
        raise IntegrityError(f"truncated header: {len(buf)} bytes")
    magic, version, msg_type, plen, crc = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise IntegrityError(f"bad magic {magic!r}")
    if version != VERSION:
        raise IntegrityError(f"unsupported version {version}")
    if msg_type not in _MSG_TYPES:
        raise IntegrityError(f"unknown msg_type {msg_type}")
    if plen > MAX_PAYLOAD:
        raise IntegrityError(f"payload_len {plen} exceeds bound")
    if len(buf) != HEADER_LEN + plen:
        raise IntegrityError(f"length mismatch: header says {plen}, have {len(buf) - HEADER_LEN}")
    payload = buf[HEADER_LEN:]
    if zlib.crc32(payload) != crc:
        raise IntegrityError("crc mismatch")
    return msg_type, payload


class FrameDecoder:
    """Incremental decoder: feed bytes, pop complete verified frames.

    Corrupt or truncated regions are skipped byte-by-byte until the next
    verifiable frame; every skipped corruption is counted.
    """

    def __init__(self):
        self._buf = bytearray()
        self.dropped_bytes = 0
        self.integrity_errors = 0

    def feed(self, data: bytes) -> list[tuple[int, bytes]]:
        self._buf.extend(data)
        frames = []
        while True:
            got = self._try_next()
            if got is None:
                break
            frames.append(got)
        return frames

    def pending(self) -> int:
        return len(self._buf)

    def _try_next(self) -> tuple[int, bytes] | None:
        buf = self._buf
        while True:
            start = buf.find(MAGIC)
            if start < 0:
                # keep the last byte: it may be the first half of a magic
                drop = max(0, len(buf) - 1)
                if drop:
                    self.dropped_bytes += drop
                    del buf[:drop]
                return None
            if start > 0:
                self.dropped_bytes += start
                del buf[:start]
            if len(buf) < HEADER_LEN:
                return None
            magic, version, msg_type, plen, crc = HEADER.unpack_from(buf)
            if version != VERSION or msg_type not in _MSG_TYPES or plen > MAX_PAYLOAD:
                self.integrity_errors += 1
                self.dropped_bytes += 1
                del buf[:1]  # false header: resume scanning one byte later
                continue
            if len(buf) < HEADER_LEN + plen:
                return None  # genuine frame may still be arriving
            payload = bytes(buf[HEADER_LEN : HEADER_LEN + plen])
            if zlib.crc32(payload) != crc:
                self.integrity_errors += 1
                self.dropped_bytes += 1
                del buf[:1]
                continue
            del buf[: HEADER_LEN + plen]
            return msg_type, payload


_FIELD_BITS = {name: 1 << i for i, name in enumerate(COMMAND_FIELDS)}
_ACTION_FIXED = struct.Struct("<QB")


def encode_command(cmd: ActionCommand) -> bytes:
    mask = 0
    for name, bit in _FIELD_BITS.items():
        if getattr(cmd, name) is not None:
            mask |= bit
    torso = np.float32(cmd.torso if cmd.torso is not None else 0.0)
    out = bytearray(_ACTION_FIXED.pack(cmd.timestamp, mask))
    out += flatten(cmd).tobytes()
    out += torso.tobytes()
    for name in COMMAND_FIELDS:
        if getattr(cmd, name) is not None:
            tag = cmd.sources[name].encode("utf-8")
            if len(tag) > 255:
                raise ValueError(f"source tag too long: {len(tag)} bytes")
            out.append(len(tag))
            out += tag
    return bytes(out)


def decode_command(payload: bytes) -> ActionCommand:
    if len(payload) < _ACTION_FIXED.size + ACTION_BYTES + 4:
        raise IntegrityError(f"action payload too short: {len(payload)}")
    ts, mask = _ACTION_FIXED.unpack_from(payload)
    off = _ACTION_FIXED.size
    vec = np.frombuffer(payload, dtype=ACTION_DTYPE, count=17, offset=off)
    off += ACTION_BYTES
    torso_val = float(np.frombuffer(payload, dtype=ACTION_DTYPE, count=1, offset=off)[0])
    off += 4

    sources: dict[str, str] = {}
    for name in COMMAND_FIELDS:
        if mask & _FIELD_BITS[name]:
            if off >= len(payload):
                raise IntegrityError("action payload truncated in source tags")
            n = payload[off]
            off += 1
            if off + n > len(payload):
                raise IntegrityError("action payload truncated in source tags")
            sources[name] = payload[off : off + n].decode("utf-8")
            off += n
    if off != len(payload):
        raise IntegrityError(f"{len(payload) - off} trailing bytes in action payload")

    vals = [float(x) for x in vec]
    fields: dict = {}
    if mask & _FIELD_BITS["left_arm"]:
        fields["left_arm"] = DeltaPose(tuple(vals[0:3]), tuple(vals[3:6]))
    if mask & _FIELD_BITS["right_arm"]:
        fields["right_arm"] = DeltaPose(tuple(vals[7:10]), tuple(vals[10:13]))
    if mask & _FIELD_BITS["left_gripper"]:
        fields["left_gripper"] = vals[6]
    if mask & _FIELD_BITS["right_gripper"]:
        fields["right_gripper"] = vals[13]
    if mask & _FIELD_BITS["base"]:
        fields["base"] = BaseVelocity(vals[14], vals[15], vals[16])
    if mask & _FIELD_BITS["torso"]:
        fields["torso"] = torso_val
    return ActionCommand(timestamp=ts, sources=sources, **fields)


_HEARTBEAT = struct.Struct("<Q")


def encode_heartbeat(timestamp_us: int) -> bytes:
    return _HEARTBEAT.pack(timestamp_us)


def decode_heartbeat(payload: bytes) -> int:
    if len(payload) != _HEARTBEAT.size:
        raise IntegrityError(f"heartbeat payload must be 8 bytes, got {len(payload)}")
    return _HEARTBEAT.unpack(payload)[0]
