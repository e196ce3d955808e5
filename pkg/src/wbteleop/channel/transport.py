"""TCP transport for the teleop channel.

The byte stream carries ordinary channel frames; framing is
self-synchronizing, so a torn TCP segment can delay a frame but never
corrupt the stream permanently. Each side emits a heartbeat every
second. A peer that has seen no inbound traffic for three heartbeat
intervals must treat the link as dead -- on the robot side that triggers
a safety stop in the session loop. Every received heartbeat is echoed
back in a control frame carrying the original timestamp, which gives the
sender a round-trip-time estimate for free.

Queueing is asymmetric by design:

* actions (operator -> robot) go into a bounded deque that drops the
  oldest entry on overflow -- a late command is worse than a lost one;
* observations (robot -> operator) keep only the latest payload, since
  rendering a stale frame wastes the tick.
"""
from __future__ import annotations

import json
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass

from ..actions import ActionCommand
from .wire import (
    MSG_ACTION,
    MSG_CONTROL,
    MSG_HEARTBEAT,
    MSG_OBSERVATION,
    FrameDecoder,
    IntegrityError,
    decode_command,
    decode_heartbeat,
    encode_command,
    encode_frame,
    encode_heartbeat,
)

HEARTBEAT_INTERVAL = 1.0
MISSED_LIMIT = 3
ACTION_QUEUE_SIZE = 64


def now_us() -> int:
    return time.monotonic_ns() // 1000


@dataclass
class LinkStats:
    sent_frames: int = 0
    received_frames: int = 0
    integrity_errors: int = 0
    dropped_actions: int = 0
    last_rtt_us: int = -1


class _Peer:
    """Common machinery for one side of an established connection."""

    def __init__(self, sock: socket.socket, heartbeat_interval: float = HEARTBEAT_INTERVAL):
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._decoder = FrameDecoder()
        self._send_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._closed = threading.Event()
        self.heartbeat_interval = heartbeat_interval
        self.stats = LinkStats()
        self.connected = True
        self._last_inbound_us = now_us()
        self._controls: deque[dict] = deque()
        self._rx_thread = threading.Thread(target=self._rx_loop, daemon=True)
        self._hb_thread = threading.Thread(target=self._hb_loop, daemon=True)
        self._rx_thread.start()
        self._hb_thread.start()

    # -- liveness ---------------------------------------------------------

    @property
    def alive(self) -> bool:
        if not self.connected:
            return False
        silence = (now_us() - self._last_inbound_us) / 1e6
        return silence < MISSED_LIMIT * self.heartbeat_interval

    # -- sending ----------------------------------------------------------

    def send_frame(self, msg_type: int, payload: bytes) -> None:
        data = encode_frame(msg_type, payload)
        with self._send_lock:
            self._sock.sendall(data)
            self.stats.sent_frames += 1

    def send_control(self, message: dict) -> None:
        self.send_frame(MSG_CONTROL, json.dumps(message).encode("utf-8"))

    # -- receiving --------------------------------------------------------

    def _rx_loop(self) -> None:
        try:
            while not self._closed.is_set():
                chunk = self._sock.recv(65536)
                if not chunk:
                    break
                frames = self._decoder.feed(chunk)
                self.stats.integrity_errors = self._decoder.integrity_errors
                t = now_us()
                self._last_inbound_us = t
                for msg_type, payload in frames:
                    self.stats.received_frames += 1
                    self._dispatch(msg_type, payload, t)
        except OSError:
            pass
        finally:
            self.connected = False

    def _dispatch(self, msg_type: int, payload: bytes, recv_us: int) -> None:
        if msg_type == MSG_HEARTBEAT:
            try:
                t = decode_heartbeat(payload)
            except IntegrityError:
                self.stats.integrity_errors += 1
                return
            try:
                self.send_control({"kind": "echo", "t_us": t})
            except OSError:
                pass
        elif msg_type == MSG_CONTROL:
            try:
                message = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self.stats.integrity_errors += 1
                return
            if isinstance(message, dict) and message.get("kind") == "echo":
                t = message.get("t_us")
                if isinstance(t, int):
                    self.stats.last_rtt_us = recv_us - t
            else:
                with self._state_lock:
                    self._controls.append(message)
        elif msg_type == MSG_ACTION:
            self._on_action(payload, recv_us)
        elif msg_type == MSG_OBSERVATION:
            self._on_observation(payload, recv_us)

    def _on_action(self, payload: bytes, recv_us: int) -> None:
        pass

    def _on_observation(self, payload: bytes, recv_us: int) -> None:
        pass

    def pop_controls(self) -> list[dict]:
        with self._state_lock:
            out = list(self._controls)
            self._controls.clear()
        return out

    # -- heartbeats -------------------------------------------------------

    def _hb_loop(self) -> None:
        while not self._closed.wait(self.heartbeat_interval):
            try:
                self.send_frame(MSG_HEARTBEAT, encode_heartbeat(now_us()))
            except OSError:
                break

    # -- shutdown ---------------------------------------------------------

    def close(self) -> None:
        self._closed.set()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
        self.connected = False
        for thread in (self._rx_thread, self._hb_thread):
            if thread is not threading.current_thread():
                thread.join(timeout=2.0)


class OperatorEndpoint(_Peer):
    """Operator side: sends actions, keeps only the newest observation."""

    def __init__(self, sock: socket.socket, heartbeat_interval: float = HEARTBEAT_INTERVAL):
        self._obs_seq = 0
        self._obs_payload: bytes | None = None
        super().__init__(sock, heartbeat_interval)

    def send_command(self, command: ActionCommand) -> None:
        self.send_frame(MSG_ACTION, encode_command(command))

    def _on_observation(self, payload: bytes, recv_us: int) -> None:
        with self._state_lock:
            self._obs_seq += 1
            self._obs_payload = payload

    def latest_observation(self) -> tuple[int, bytes | None]:
        """(sequence, payload); the payload is still compressed. The
        sequence only counts arrivals, so callers can skip stale frames."""
        with self._state_lock:
            return self._obs_seq, self._obs_payload


class RobotEndpoint(_Peer):
    """Robot side: bounded action queue (drop-oldest), sends observations."""

    def __init__(self, sock: socket.socket, heartbeat_interval: float = HEARTBEAT_INTERVAL):
        self._actions: deque[tuple[int, ActionCommand]] = deque(maxlen=ACTION_QUEUE_SIZE)
        super().__init__(sock, heartbeat_interval)

    def _on_action(self, payload: bytes, recv_us: int) -> None:
        try:
            command = decode_command(payload)
        except IntegrityError:
            self.stats.integrity_errors += 1
            return
        with self._state_lock:
            if len(self._actions) == self._actions.maxlen:
                self.stats.dropped_actions += 1
            self._actions.append((recv_us, command))

    def pop_actions(self) -> list[tuple[int, ActionCommand]]:
        """Drain queued (arrival_us, command) pairs in arrival order."""
        with self._state_lock:
            out = list(self._actions)
            self._actions.clear()
        return out

    def send_observation(self, payload: bytes) -> None:
        self.send_frame(MSG_OBSERVATION, payload)


class RobotListener:
    """Listening socket for the robot side; one operator at a time."""

    def __init__(self, host: str, port: int):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(1)

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def accept(
        self, timeout: float | None = None, heartbeat_interval: float = HEARTBEAT_INTERVAL
    ) -> RobotEndpoint:
        self._sock.settimeout(timeout)
        conn, _addr = self._sock.accept()
        conn.settimeout(None)
        return RobotEndpoint(conn, heartbeat_interval)

    def close(self) -> None:
        self._sock.close()


def serve_robot(host: str, port: int) -> RobotListener:
    return RobotListener(host, port)


def connect_operator(
    host: str,
    port: int,
    timeout: float = 5.0,
    heartbeat_interval: float = HEARTBEAT_INTERVAL,
) -> OperatorEndpoint:
    """Dial the robot; raises ConnectionRefusedError/OSError on failure."""
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.settimeout(None)
    return OperatorEndpoint(sock, heartbeat_interval)
