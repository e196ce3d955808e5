"""Session orchestration: wiring devices, channel, robot and sim together.

Three roles share one per-tick pipeline:

* ``local``   -- devices, channel and simulator in a single loop, ticked on
  a logical clock (no sleeping, runs as fast as the machine allows);
* ``serve``   -- the robot side: owns the simulator, accepts one TCP
  operator, paces ticks against the wall clock;
* ``connect`` -- the operator side: owns the devices, dials a robot.

The robot-side tick is always: render and publish the observation, ingest
whatever commands arrived, consolidate, quantize, record, map, step. The
consolidated command is round-tripped through the wire codec before it is
recorded or used, so live execution computes on exactly the float32 values
a replay will read back -- that is what makes recordings replay bit-exact.

Command timestamps are re-stamped with the robot's own tick clock on
arrival; staleness policy then works on one clock regardless of the
network path, and a stretch of silence three heartbeats long triggers a
safety stop (consolidator reset) until traffic resumes.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .actions import ActionCommand
from .channel.consolidate import ConsolidationPolicy, Consolidator
from .channel.latency import LatencyModel, LatencyPipe
from .channel.observation import compress_observation
from .channel.transport import (
    OperatorEndpoint,
    RobotEndpoint,
    connect_operator,
    serve_robot,
)
from .channel.websocket import WebSocketServer
from .channel.wire import (
    MSG_ACTION,
    MSG_OBSERVATION,
    IntegrityError,
    decode_command,
    encode_command,
    encode_frame,
)
from .interfaces import build_parser, expand_assignment, merge, read_event_file
from .interfaces.config import ConfigError, ParserConfig
from .interfaces.events import InputEvent
from .recorder import Recorder
from .robot.embodiment import EmbodimentSpec, load_embodiment
from .robot.mapping import filter_unusable, map_command
from .sim.render import render_observation
from .sim.tasks import TaskSpec, check_task, load_task
from .sim.world import state_hash, step

DEFAULT_TICK_RATE = 20


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class DeviceSpec:
    id: str
    kind: str
    config: ParserConfig = field(default_factory=ParserConfig)
    keymap: dict | None = None


@dataclass(frozen=True)
class SessionConfig:
    task: str = "pick_pot"
    embodiment: str | None = None  # None -> the task's default
    seed: int = 0
    ticks_per_second: int = DEFAULT_TICK_RATE
    devices: tuple[DeviceSpec, ...] = ()
    assignment: dict = field(default_factory=dict)
    record_path: str | None = None
    script_path: str | None = None
    latency: LatencyModel | None = None
    ws_port: int | None = None
    endpoint: tuple[str, int] = ("127.0.0.1", 8734)
    max_ticks: int | None = None
    accept_timeout: float = 30.0

    def __post_init__(self):
        if self.ticks_per_second <= 0 or self.ticks_per_second > 1000:
            raise ConfigError(f"ticks_per_second out of range: {self.ticks_per_second}")

    @property
    def tick_us(self) -> int:
        return round(1_000_000 / self.ticks_per_second)


class _LineDict(dict):
    """dict that remembers the source line of each key."""

    def __init__(self):
        super().__init__()
        self.key_lines: dict = {}


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _LineLoader, node, deep=False):
    loader.flatten_mapping(node)
    mapping = _LineDict()
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        line = key_node.start_mark.line + 1
        if key in mapping:
            raise ConfigError(f"duplicate key {key!r}", line=line)
        mapping[key] = loader.construct_object(value_node, deep=deep)
        mapping.key_lines[key] = line
    return mapping


_LineLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _key_line(node: dict, key: str) -> int | None:
    return getattr(node, "key_lines", {}).get(key)


def _parser_config(node: dict, path: str) -> ParserConfig:
    known = {f.name for f in fields(ParserConfig)}
    for key in node:
        if key not in known:
            raise ConfigError(
                f"unknown parser option {key!r}", path=path, line=_key_line(node, key)
            )
    try:
        return ParserConfig(**node)
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"bad parser options: {exc}", path=path) from exc


def session_config_from_dict(doc: dict, path: str = "<dict>") -> SessionConfig:
    """Build a session config from a parsed YAML document; every rejection
    is a ConfigError naming the file and, where known, the line."""
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping", path=path, line=1)
    known = {
        "task", "embodiment", "seed", "ticks_per_second", "devices",
        "assignment", "record", "script", "latency", "ws_port", "endpoint",
        "max_ticks",
    }
    for key in doc:
        if key not in known:
            raise ConfigError(
                f"unknown setting {key!r}", path=path, line=_key_line(doc, key)
            )

    devices = []
    seen_ids = set()
    for i, node in enumerate(doc.get("devices") or []):
        if not isinstance(node, dict):
            raise ConfigError(f"device #{i} must be a mapping", path=path)
        for req in ("id", "type"):
            if req not in node:
                raise ConfigError(f"device #{i} missing {req!r}", path=path)
        dev_id = str(node["id"])
        if dev_id in seen_ids:
            raise ConfigError(
                f"duplicate device id {dev_id!r}", path=path, line=_key_line(node, "id")
            )
        seen_ids.add(dev_id)
        cfg_node = node.get("config") or {}
        devices.append(
            DeviceSpec(
                id=dev_id,
                kind=str(node["type"]),
                config=_parser_config(cfg_node, path),
                keymap=node.get("keymap"),
            )
        )

    assignment_node = doc.get("assignment") or {}
    try:
        assignment = expand_assignment(assignment_node, seen_ids or None)
    except ConfigError as exc:
        raise ConfigError(str(exc.args[0]), path=path) from exc

    latency = None
    if doc.get("latency"):
        try:
            latency = LatencyModel.parse(str(doc["latency"]))
        except ValueError as exc:
            raise ConfigError(
                f"bad latency spec: {exc}", path=path, line=_key_line(doc, "latency")
            ) from exc

    endpoint = ("127.0.0.1", 8734)
    if doc.get("endpoint"):
        endpoint = parse_endpoint(str(doc["endpoint"]))

    try:
        return SessionConfig(
            task=str(doc.get("task", "pick_pot")),
            embodiment=(str(doc["embodiment"]) if doc.get("embodiment") else None),
            seed=int(doc.get("seed", 0)),
            ticks_per_second=int(doc.get("ticks_per_second", DEFAULT_TICK_RATE)),
            devices=tuple(devices),
            assignment=assignment,
            record_path=(str(doc["record"]) if doc.get("record") else None),
            script_path=(str(doc["script"]) if doc.get("script") else None),
            latency=latency,
            ws_port=(int(doc["ws_port"]) if doc.get("ws_port") is not None else None),
            endpoint=endpoint,
            max_ticks=(int(doc["max_ticks"]) if doc.get("max_ticks") else None),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed session config: {exc}", path=path) from exc


def load_session_config(path: str | Path) -> SessionConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except ConfigError as exc:
        raise ConfigError(exc.args[0], path=str(path), line=exc.line) from exc
    except yaml.YAMLError as exc:
        line = None
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise ConfigError(f"invalid YAML: {exc}", path=str(path), line=line) from exc
    return session_config_from_dict(doc or {}, path=str(path))


def parse_endpoint(spec: str) -> tuple[str, int]:
    host, sep, port = spec.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"endpoint must be host:port, got {spec!r}")
    try:
        return host, int(port)
    except ValueError as exc:
        raise ConfigError(f"bad endpoint port in {spec!r}") from exc


# --------------------------------------------------------------------------
# operator side: devices + scripted events


class OperatorRig:
    """Feeds scripted events to parsers and merges their partials."""

    def __init__(self, config: SessionConfig):
        self.parsers = {
            dev.id: build_parser(dev.kind, dev.id, dev.config, dev.keymap)
            for dev in config.devices
        }
        self.assignment = dict(config.assignment)
        self.unknown_events = 0
        events: list[InputEvent] = []
        if config.script_path:
            events = list(read_event_file(config.script_path))
            events.sort(key=lambda ev: ev.timestamp)
        self._events = events
        self._cursor = 0

    @property
    def exhausted(self) -> bool:
        return self._cursor >= len(self._events)

    def pump(self, now_us: int) -> ActionCommand:
        """Deliver all events due by ``now_us`` and merge the tick output."""
        while self._cursor < len(self._events):
            ev = self._events[self._cursor]
            if ev.timestamp > now_us:
                break
            self._cursor += 1
            parser = self.parsers.get(ev.device_id)
            if parser is None:
                self.unknown_events += 1
                continue
            parser.feed(ev)
        partials = [parser.tick(now_us) for parser in self.parsers.values()]
        return merge(partials, self.assignment, now_us)


# --------------------------------------------------------------------------
# robot side: sim + consolidation + recording


class SimHost:
    """Owns the simulated robot: per-tick observe / ingest / advance."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self.task: TaskSpec = load_task(config.task)
        self.spec: EmbodimentSpec = load_embodiment(config.embodiment or self.task.embodiment)
        self.state = self.task.build(config.seed, self.spec)
        self.consolidator = Consolidator(ConsolidationPolicy())
        self.counters: dict[str, int] = {}
        self.tick = 0
        self.tick_us = config.tick_us
        self.dt = self.tick_us / 1e6
        self.prev_base: tuple[float, float, float] | None = None
        self.recorder: Recorder | None = None
        if config.record_path:
            self.recorder = Recorder(
                config.record_path,
                task=config.task,
                embodiment=config.embodiment or self.task.embodiment,
                seed=config.seed,
                tick_us=self.tick_us,
            )
        self.ws: WebSocketServer | None = None
        if config.ws_port is not None:
            self.ws = WebSocketServer(port=config.ws_port)

    @property
    def now_us(self) -> int:
        return self.tick * self.tick_us

    @property
    def max_ticks(self) -> int:
        if self.config.max_ticks is not None:
            return self.config.max_ticks
        return math.ceil(self.task.time_limit / self.dt)

    def observe(self) -> bytes:
        obs = render_observation(self.state, self.spec, self.prev_base)
        payload = compress_observation(obs)
        if self.ws is not None:
            self.ws.broadcast(encode_frame(MSG_OBSERVATION, payload))
        return payload

    def ingest(self, command: ActionCommand, restamp: bool = True) -> None:
        if restamp:
            command = command.with_timestamp(self.now_us)
        self.consolidator.ingest(filter_unusable(command, self.spec, self.counters))

    def pump_console(self) -> None:
        """Ingest action frames sent by browser consoles, if any."""
        if self.ws is None:
            return
        for _cid, msg_type, payload in self.ws.pop_frames():
            if msg_type != MSG_ACTION:
                continue
            try:
                command = decode_command(payload)
            except IntegrityError:
                self.counters["bad_console_frames"] = (
                    self.counters.get("bad_console_frames", 0) + 1
                )
                continue
            self.ingest(command, restamp=True)

    def safety_stop(self) -> None:
        self.consolidator.reset()
        self.counters["safety_stops"] = self.counters.get("safety_stops", 0) + 1

    def advance(self, obs_payload: bytes) -> tuple[bool, bool]:
        """Consolidate, record, map and step one tick; returns (success, done)."""
        command = self.consolidator.consolidate(self.now_us)
        command = decode_command(encode_command(command))  # compute on wire-exact floats
        if self.recorder is not None:
            self.recorder.record_step(self.tick, obs_payload, command)
        robot_command = map_command(command, self.state.joints, self.spec, self.dt)
        self.prev_base = self.state.base
        self.state = step(self.state, robot_command, self.dt, self.spec)
        self.tick += 1
        return check_task(self.state, self.task)

    def finalize(self, success: bool) -> str:
        digest = state_hash(self.state)
        if self.recorder is not None:
            self.recorder.finalize(self.state.sim_time, success, digest)
        if self.ws is not None:
            self.ws.close()
        return f"{digest:016x}"


# --------------------------------------------------------------------------
# reports and loops


@dataclass(frozen=True)
class SessionReport:
    role: str
    success: bool
    ticks: int
    sim_time: float
    state_hash: str = ""
    record_path: str | None = None
    counters: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def summary(self) -> str:
        bits = [
            f"role={self.role}",
            f"success={self.success}",
            f"ticks={self.ticks}",
            f"sim_time={self.sim_time:.2f}s",
        ]
        if self.state_hash:
            bits.append(f"state_hash={self.state_hash}")
        if self.record_path:
            bits.append(f"record={self.record_path}")
        for key in sorted(self.counters):
            bits.append(f"{key}={self.counters[key]}")
        for key in sorted(self.stats):
            bits.append(f"{key}={self.stats[key]}")
        return " ".join(bits)


def run_local(config: SessionConfig) -> SessionReport:
    """Devices, channel and sim in one deterministic logical-clock loop."""
    host = SimHost(config)
    rig = OperatorRig(config)
    pipe: LatencyPipe | None = None
    if config.latency is not None and not config.latency.is_identity():
        pipe = LatencyPipe(config.latency)

    success = False
    done = False
    while not done and host.tick < host.max_ticks:
        now = host.now_us
        payload = host.observe()
        merged = rig.pump(now)
        if pipe is not None:
            if not merged.is_empty():
                pipe.push(merged, now)
            for cmd in pipe.pop_ready(now):
                host.ingest(cmd, restamp=True)
        elif not merged.is_empty():
            host.ingest(merged, restamp=False)
        host.pump_console()
        success, done = host.advance(payload)

    digest = host.finalize(success)
    stats = {}
    if pipe is not None:
        stats["dropped_commands"] = pipe.dropped
    if rig.unknown_events:
        stats["unknown_script_events"] = rig.unknown_events
    return SessionReport(
        role="local",
        success=success,
        ticks=host.tick,
        sim_time=host.state.sim_time,
        state_hash=digest,
        record_path=config.record_path,
        counters=dict(host.counters),
        stats=stats,
    )


def _pace(t0: float, tick: int, dt: float) -> None:
    delay = t0 + (tick + 1) * dt - time.perf_counter()
    if delay > 0:
        time.sleep(delay)


def run_serve(config: SessionConfig) -> SessionReport:
    """Robot side: simulate, publish observations, execute what arrives."""
    host = SimHost(config)
    listener = serve_robot(*config.endpoint)
    endpoint: RobotEndpoint | None = None
    try:
        endpoint = listener.accept(timeout=config.accept_timeout)
    except OSError:
        listener.close()
        if host.ws is None:
            raise
        # no TCP operator, but a console may still drive the session

    success = False
    done = False
    in_outage = False
    t0 = time.perf_counter()
    try:
        while not done and host.tick < host.max_ticks:
            payload = host.observe()
            if endpoint is not None:
                if not endpoint.connected:
                    break
                try:
                    endpoint.send_observation(payload)
                except OSError:
                    break
                for _recv_us, command in endpoint.pop_actions():
                    host.ingest(command, restamp=True)
                if endpoint.alive:
                    in_outage = False
                elif not in_outage:
                    host.safety_stop()
                    in_outage = True
            host.pump_console()
            success, done = host.advance(payload)
            _pace(t0, host.tick - 1, host.dt)
    finally:
        digest = host.finalize(success)
        if endpoint is not None:
            try:
                endpoint.send_control({"kind": "done", "success": success})
            except OSError:
                pass
            endpoint.close()
        listener.close()

    stats: dict = {}
    if endpoint is not None:
        stats.update(
            frames_sent=endpoint.stats.sent_frames,
            frames_received=endpoint.stats.received_frames,
            integrity_errors=endpoint.stats.integrity_errors,
            dropped_actions=endpoint.stats.dropped_actions,
        )
        if endpoint.stats.last_rtt_us >= 0:
            stats["last_rtt_ms"] = round(endpoint.stats.last_rtt_us / 1000.0, 3)
    return SessionReport(
        role="serve",
        success=success,
        ticks=host.tick,
        sim_time=host.state.sim_time,
        state_hash=digest,
        record_path=config.record_path,
        counters=dict(host.counters),
        stats=stats,
    )


def run_connect(config: SessionConfig) -> SessionReport:
    """Operator side: parse device input, stream commands, track the link."""
    rig = OperatorRig(config)
    endpoint: OperatorEndpoint = connect_operator(*config.endpoint)
    pipe: LatencyPipe | None = None
    if config.latency is not None and not config.latency.is_identity():
        pipe = LatencyPipe(config.latency)

    tick_us = config.tick_us
    dt = tick_us / 1e6
    max_ticks = config.max_ticks if config.max_ticks is not None else 1 << 31
    tick = 0
    observations = 0
    last_seq = 0
    success = False
    t0 = time.perf_counter()
    try:
        while tick < max_ticks:
            done = False
            for message in endpoint.pop_controls():
                if message.get("kind") == "done":
                    success = bool(message.get("success", False))
                    done = True
            if done or not endpoint.connected:
                break
            now = tick * tick_us
            merged = rig.pump(now)
            outbox = []
            if pipe is not None:
                if not merged.is_empty():
                    pipe.push(merged, now)
                outbox = pipe.pop_ready(now)
            elif not merged.is_empty():
                outbox = [merged]
            try:
                for command in outbox:
                    endpoint.send_command(command)
            except OSError:
                break
            seq, _payload = endpoint.latest_observation()
            if seq != last_seq:
                observations += seq - last_seq
                last_seq = seq
            tick += 1
            _pace(t0, tick - 1, dt)
    finally:
        stats = {
            "frames_sent": endpoint.stats.sent_frames,
            "frames_received": endpoint.stats.received_frames,
            "integrity_errors": endpoint.stats.integrity_errors,
            "observations": observations,
        }
        if endpoint.stats.last_rtt_us >= 0:
            stats["last_rtt_ms"] = round(endpoint.stats.last_rtt_us / 1000.0, 3)
        if pipe is not None:
            stats["dropped_commands"] = pipe.dropped
        if rig.unknown_events:
            stats["unknown_script_events"] = rig.unknown_events
        endpoint.close()

    return SessionReport(
        role="connect",
        success=success,
        ticks=tick,
        sim_time=tick * dt,
        counters={},
        stats=stats,
    )
