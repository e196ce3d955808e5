"""Raw input events shared by all device parsers.

Every device — physical or scripted — is a stream of ``InputEvent``s.  The
payload is one of five variants: key, axis, button, tracked pose, or a full
body-keypoint frame.  Scripted devices read the same events from
newline-delimited JSON files (one event per line), which is the primary test
surface for everything interactive.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ..geometry import Pose, Vec3

KEYPOINT_NAMES = ("hips", "left_palm", "right_palm", "left_ankle", "right_ankle")


def _clamp_axis(v: float) -> float:
    v = float(v)
    return -1.0 if v < -1.0 else (1.0 if v > 1.0 else v)


@dataclass(frozen=True)
class KeyInput:
    code: str
    pressed: bool


@dataclass(frozen=True)
class AxisInput:
    index: int
    value: float  # clamped to [-1, 1]

    def __post_init__(self):
        object.__setattr__(self, "value", _clamp_axis(self.value))


@dataclass(frozen=True)
class ButtonInput:
    index: int
    pressed: bool


@dataclass(frozen=True)
class TrackedPose:
    hand: str  # "left" | "right"
    pose: Pose

    def __post_init__(self):
        if self.hand not in ("left", "right"):
            raise ValueError(f"hand must be 'left' or 'right', got {self.hand!r}")


@dataclass(frozen=True)
class KeypointFrame:
    """One frame of body keypoints in the camera frame (absolute depth)."""

    hip_center: Vec3
    hip_yaw: float
    left_palm: Pose
    right_palm: Pose
    left_ankle: Vec3
    right_ankle: Vec3
    confidence: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, point in (
            ("hip_center", self.hip_center),
            ("left_ankle", self.left_ankle),
            ("right_ankle", self.right_ankle),
        ):
            vec = tuple(float(c) for c in point)
            if len(vec) != 3 or not all(math.isfinite(c) for c in vec):
                raise ValueError(f"{name} must be a finite 3-vector, got {point!r}")
            object.__setattr__(self, name, vec)
        conf = {}
        for name, c in self.confidence.items():
            if name not in KEYPOINT_NAMES:
                raise ValueError(f"unknown keypoint {name!r}")
            c = float(c)
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"confidence for {name} out of [0,1]: {c}")
            conf[name] = c
        object.__setattr__(self, "confidence", conf)

    def conf(self, name: str) -> float:
        """Confidence for a keypoint; unreported points count as fully confident."""
        return self.confidence.get(name, 1.0)


Payload = KeyInput | AxisInput | ButtonInput | TrackedPose | KeypointFrame


@dataclass(frozen=True)
class InputEvent:
    device_id: str
    timestamp: int  # monotonic microseconds
    payload: Payload

    def __post_init__(self):
        object.__setattr__(self, "timestamp", int(self.timestamp))


def _pose_to_json(p: Pose) -> dict:
    return {"position": list(p.position), "orientation": list(p.orientation)}


def _pose_from_json(d: dict) -> Pose:
    return Pose(tuple(d["position"]), tuple(d["orientation"]))


def event_to_json(ev: InputEvent) -> dict:
    d: dict = {"device_id": ev.device_id, "t": ev.timestamp}
    p = ev.payload
    if isinstance(p, KeyInput):
        d["key"] = {"code": p.code, "pressed": p.pressed}
    elif isinstance(p, AxisInput):
        d["axis"] = {"index": p.index, "value": p.value}
    elif isinstance(p, ButtonInput):
        d["button"] = {"index": p.index, "pressed": p.pressed}
    elif isinstance(p, TrackedPose):
        d["pose"] = {"hand": p.hand, **_pose_to_json(p.pose)}
    elif isinstance(p, KeypointFrame):
        d["keypoints"] = {
            "hip_center": list(p.hip_center),
            "hip_yaw": p.hip_yaw,
            "left_palm": _pose_to_json(p.left_palm),
            "right_palm": _pose_to_json(p.right_palm),
            "left_ankle": list(p.left_ankle),
            "right_ankle": list(p.right_ankle),
            "confidence": dict(p.confidence),
        }
    else:  # pragma: no cover - payload union is closed
        raise TypeError(f"unknown payload {type(p).__name__}")
    return d


def event_from_json(d: dict) -> InputEvent:
    device_id = d["device_id"]
    t = int(d["t"])
    if "key" in d:
        payload: Payload = KeyInput(d["key"]["code"], bool(d["key"]["pressed"]))
    elif "axis" in d:
        payload = AxisInput(int(d["axis"]["index"]), float(d["axis"]["value"]))
    elif "button" in d:
        payload = ButtonInput(int(d["button"]["index"]), bool(d["button"]["pressed"]))
    elif "pose" in d:
        payload = TrackedPose(d["pose"]["hand"], _pose_from_json(d["pose"]))
    elif "keypoints" in d:
        k = d["keypoints"]
        payload = KeypointFrame(
            hip_center=tuple(k["hip_center"]),
            hip_yaw=float(k["hip_yaw"]),
            left_palm=_pose_from_json(k["left_palm"]),
            right_palm=_pose_from_json(k["right_palm"]),
            left_ankle=tuple(k["left_ankle"]),
            right_ankle=tuple(k["right_ankle"]),
            confidence=k.get("confidence", {}),
        )
    else:
        raise ValueError(f"event line has no payload key: {sorted(d)}")
    return InputEvent(device_id, t, payload)


def write_event_file(path, events: Iterable[InputEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(event_to_json(ev), separators=(",", ":")) + "\n")


def read_event_file(path) -> Iterator[InputEvent]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                yield event_from_json(json.loads(line))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad event line: {exc}") from exc
