"""Observation frames and their lossless compressed encoding.

Payload layout (little-endian, version byte first):

    u8                codec version (= 1)
    f64               sim_time (s)
    3 x f64           base odometry delta since previous frame (dx, dy, dtheta)
    2 x f64           gripper state (left, right)
    u8                ee pose count; per pose:
                        u8 name length + UTF-8 name, 7 x f64 (position, quat wxyz)
    u8                rgb image count; per image:
                        u8 id length + UTF-8 camera id, u16 width, u16 height,
                        u32 deflate length, deflate(row-major u8 RGB)
    u8                depth image count; per image: same header,
                        deflate(row-major u16 LE millimeters, 0 = invalid)

Image planes are deflate-compressed individually; everything else is a fixed
layout.  decompress(compress(f)) reproduces the frame bit-exactly.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Pose

OBS_VERSION = 1

_HEAD = struct.Struct("<Bd3d2d")
_POSE = struct.Struct("<7d")
_IMG_HEAD = struct.Struct("<HHI")


class ObservationDecodeError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationFrame:
    """One tick of robot sensing: images plus proprioception."""

    sim_time: float = 0.0
    base_odom_delta: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gripper_state: tuple[float, float] = (0.0, 0.0)
    ee_poses: dict[str, Pose] = field(default_factory=dict)
    rgb: dict[str, np.ndarray] = field(default_factory=dict)  # (h, w, 3) u8
    depth: dict[str, np.ndarray] = field(default_factory=dict)  # (h, w) u16 mm

    def __post_init__(self):
        for cam, img in self.rgb.items():
            if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
                raise ValueError(f"rgb[{cam!r}] must be (h, w, 3) uint8, got "
                                 f"{img.dtype} {img.shape}")
        for cam, img in self.depth.items():
            if img.dtype != np.uint16 or img.ndim != 2:
                raise ValueError(f"depth[{cam!r}] must be (h, w) uint16, got "
                                 f"{img.dtype} {img.shape}")

    def equals(self, other: "ObservationFrame") -> bool:
        """Bit-exact comparison (== on floats, array_equal on images)."""
        return (
            self.sim_time == other.sim_time
            and self.base_odom_delta == other.base_odom_delta
            and self.gripper_state == other.gripper_state
            and self.ee_poses == other.ee_poses
            and self.rgb.keys() == other.rgb.keys()
            and self.depth.keys() == other.depth.keys()
            and all(np.array_equal(self.rgb[k], other.rgb[k]) for k in self.rgb)
            and all(np.array_equal(self.depth[k], other.depth[k]) for k in self.depth)
        )


def _pack_name(name: str) -> bytes:
    raw = name.encode("utf-8")
    if len(raw) > 255:
        raise ValueError(f"name too long: {name!r}")
    return bytes([len(raw)]) + raw


def compress_observation(frame: ObservationFrame) -> bytes:
    out = bytearray(
        _HEAD.pack(
            OBS_VERSION,
            frame.sim_time,
            *frame.base_odom_delta,
            *frame.gripper_state,
        )
    )
    out.append(len(frame.ee_poses))
    for name in sorted(frame.ee_poses):
        p = frame.ee_poses[name]
        out += _pack_name(name)
        out += _POSE.pack(*p.position, *p.orientation)
    for images, pack in ((frame.rgb, _pack_rgb), (frame.depth, _pack_depth)):
        out.append(len(images))
        for cam in sorted(images):
            img = images[cam]
            comp = zlib.compress(pack(img), level=6)
            out += _pack_name(cam)
            out += _IMG_HEAD.pack(img.shape[1], img.shape[0], len(comp))
            out += comp
    return bytes(out)


def _pack_rgb(img: np.ndarray) -> bytes:
    return np.ascontiguousarray(img).tobytes()


def _pack_depth(img: np.ndarray) -> bytes:
    return np.ascontiguousarray(img.astype("<u2", copy=False)).tobytes()


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.buf):
            raise ObservationDecodeError(
                f"truncated at offset {self.off}: need {n} more bytes"
            )
        out = self.buf[self.off : self.off + n]
        self.off += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))

    def name(self) -> str:
        n = self.take(1)[0]
        return self.take(n).decode("utf-8")


def decompress_observation(payload: bytes) -> ObservationFrame:
    r = _Reader(payload)
    version, sim_time, dx, dy, dth, gl, gr = r.unpack(_HEAD)
    if version != OBS_VERSION:
        raise ObservationDecodeError(f"unsupported observation version {version}")

    ee_poses: dict[str, Pose] = {}
    for _ in range(r.take(1)[0]):
        name = r.name()
        vals = r.unpack(_POSE)
        ee_poses[name] = Pose(tuple(vals[:3]), tuple(vals[3:]))

    rgb: dict[str, np.ndarray] = {}
    depth: dict[str, np.ndarray] = {}
    for images, dtype, channels in ((rgb, np.uint8, 3), (depth, np.uint16, 1)):
        for _ in range(r.take(1)[0]):
            cam = r.name()
            w, h, clen = r.unpack(_IMG_HEAD)
            try:
                raw = zlib.decompress(r.take(clen))
            except zlib.error as exc:
                raise ObservationDecodeError(f"corrupt image stream for {cam!r}: {exc}")
            expect = w * h * channels * np.dtype(dtype).itemsize
            if len(raw) != expect:
                raise ObservationDecodeError(
                    f"image {cam!r}: {len(raw)} bytes for {w}x{h}, expected {expect}"
                )
            arr = np.frombuffer(raw, dtype="<u2" if dtype is np.uint16 else np.uint8)
            shape = (h, w) if channels == 1 else (h, w, 3)
            images[cam] = arr.reshape(shape).astype(dtype, copy=False)
    if r.off != len(payload):
        raise ObservationDecodeError(f"{len(payload) - r.off} trailing bytes")

    return ObservationFrame(
        sim_time=sim_time,
        base_odom_delta=(dx, dy, dth),
        gripper_state=(gl, gr),
        ee_poses=ee_poses,
        rgb=rgb,
        depth=depth,
    )
