"""Session recording and deterministic replay.

A recording is a flat sequence of ordinary channel frames:

    control {kind: header, version, task, embodiment, seed, tick_us}
    observation payload        # tick 0, rendered before acting
    action payload             # tick 0, the consolidated command
    observation payload        # tick 1
    action payload             # tick 1
    ...
    control {kind: footer, ticks, sim_time, success, state_hash}

Replay rebuilds the world from (task, seed, embodiment), applies the
recorded commands through the same mapping and stepping code as the live
session, and re-renders every observation. Because commands are recorded
after float32 quantization and the whole pipeline is deterministic, a
faithful replay matches bit for bit; the first tick whose re-rendered
observation differs from the recorded one is reported as the divergence
point, and the final world hash is checked against the footer.

A small JSON manifest is written next to the recording for quick listing
without parsing the container.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

from .actions import ActionCommand
from .channel.observation import decompress_observation
from .channel.wire import (
    HEADER,
    MAGIC,
    MSG_ACTION,
    MSG_CONTROL,
    MSG_OBSERVATION,
    VERSION,
    IntegrityError,
    decode_command,
    encode_command,
    encode_frame,
)
from .robot.embodiment import load_embodiment
from .robot.mapping import map_command
from .sim.render import render_observation
from .sim.tasks import check_task, load_task
from .sim.world import state_hash, step

SESSION_SUFFIX = ".tmep"
RECORD_VERSION = 1


class RecordingError(ValueError):
    """The container is malformed or was driven out of order."""


def iter_frames(data: bytes):
    """Strict sequential frame iterator for trusted container bytes."""
    offset = 0
    while offset < len(data):
        if len(data) - offset < HEADER.size:
            raise RecordingError(f"truncated frame header at byte {offset}")
        magic, version, msg_type, length, crc = HEADER.unpack_from(data, offset)
        if magic != MAGIC or version != VERSION:
            raise RecordingError(f"bad frame header at byte {offset}")
        start = offset + HEADER.size
        if start + length > len(data):
            raise RecordingError(f"truncated frame payload at byte {offset}")
        payload = data[start : start + length]
        if zlib.crc32(payload) != crc:
            raise RecordingError(f"checksum mismatch at byte {offset}")
        yield msg_type, payload
        offset = start + length


class Recorder:
    """Writes one recording; frames are flushed as they are produced."""

    def __init__(self, path: str | Path, task: str, embodiment: str, seed: int, tick_us: int):
        self.path = Path(path)
        self.header = {
            "kind": "header",
            "version": RECORD_VERSION,
            "task": task,
            "embodiment": embodiment,
            "seed": seed,
            "tick_us": tick_us,
        }
        self.ticks = 0
        self._fh = open(self.path, "wb")
        self._control(self.header)
        self._footer: dict | None = None

    def _control(self, message: dict) -> None:
        self._fh.write(encode_frame(MSG_CONTROL, json.dumps(message).encode("utf-8")))

    def record_step(self, tick: int, obs_payload: bytes, command: ActionCommand) -> None:
        if self._footer is not None:
            raise RecordingError("recorder already finalized")
        if tick != self.ticks:
            raise RecordingError(f"expected tick {self.ticks}, got {tick}")
        self._fh.write(encode_frame(MSG_OBSERVATION, obs_payload))
        self._fh.write(encode_frame(MSG_ACTION, encode_command(command)))
        self.ticks += 1

    def finalize(self, sim_time: float, success: bool, final_hash: int) -> dict:
        if self._footer is None:
            self._footer = {
                "kind": "footer",
                "ticks": self.ticks,
                "sim_time": sim_time,
                "success": success,
                "state_hash": f"{final_hash:016x}",
            }
            self._control(self._footer)
            self._fh.close()
            manifest = dict(self.header, **{k: v for k, v in self._footer.items() if k != "kind"})
            manifest["kind"] = "manifest"
            sidecar = self.path.with_suffix(self.path.suffix + ".json")
            sidecar.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        return self._footer

    def close(self) -> None:
        if self._footer is None and not self._fh.closed:
            self._fh.close()


@dataclass(frozen=True)
class SessionLog:
    header: dict
    steps: tuple[tuple[bytes, ActionCommand], ...]
    footer: dict


def read_session(path: str | Path) -> SessionLog:
    data = Path(path).read_bytes()
    try:
        frames = list(iter_frames(data))
    except IntegrityError as exc:
        raise RecordingError(str(exc)) from exc
    if not frames:
        raise RecordingError("empty recording")

    def control(index: int, kind: str) -> dict:
        msg_type, payload = frames[index]
        if msg_type != MSG_CONTROL:
            raise RecordingError(f"expected {kind} control frame at index {index}")
        message = json.loads(payload.decode("utf-8"))
        if message.get("kind") != kind:
            raise RecordingError(f"expected {kind} frame, got {message.get('kind')!r}")
        return message

    header = control(0, "header")
    footer = control(len(frames) - 1, "footer")
    body = frames[1:-1]
    if len(body) % 2 != 0:
        raise RecordingError("unpaired observation/action frames")
    steps = []
    for i in range(0, len(body), 2):
        obs_type, obs_payload = body[i]
        act_type, act_payload = body[i + 1]
        if obs_type != MSG_OBSERVATION or act_type != MSG_ACTION:
            raise RecordingError(f"frame pair {i // 2} out of order")
        try:
            command = decode_command(act_payload)
        except IntegrityError as exc:
            raise RecordingError(f"bad action at step {i // 2}: {exc}") from exc
        steps.append((obs_payload, command))
    if footer.get("ticks") != len(steps):
        raise RecordingError(
            f"footer says {footer.get('ticks')} ticks, file holds {len(steps)}"
        )
    return SessionLog(header=header, steps=tuple(steps), footer=footer)


@dataclass(frozen=True)
class ReplayReport:
    ticks: int
    first_divergence: int | None
    recorded_hash: str
    replayed_hash: str
    success: bool

    @property
    def hash_match(self) -> bool:
        return self.recorded_hash == self.replayed_hash

    @property
    def clean(self) -> bool:
        return self.first_divergence is None and self.hash_match


def replay_session(path: str | Path) -> ReplayReport:
    """Re-simulate a recording and locate the first divergence, if any."""
    log = read_session(path)
    spec = load_embodiment(log.header["embodiment"])
    task = load_task(log.header["task"])
    state = task.build(int(log.header["seed"]), spec)
    dt = int(log.header["tick_us"]) / 1e6

    first_divergence: int | None = None
    prev_base: tuple[float, float, float] | None = None
    for tick, (obs_payload, command) in enumerate(log.steps):
        observation = render_observation(state, spec, prev_base)
        if first_divergence is None:
            recorded = decompress_observation(obs_payload)
            if not observation.equals(recorded):
                first_divergence = tick
        prev_base = state.base
        robot_command = map_command(command, state.joints, spec, dt)
        state = step(state, robot_command, dt, spec)

    success, _done = check_task(state, task)
    return ReplayReport(
        ticks=len(log.steps),
        first_divergence=first_divergence,
        recorded_hash=str(log.footer["state_hash"]),
        replayed_hash=f"{state_hash(state):016x}",
        success=success,
    )
