"""Minimal WebSocket (RFC 6455) server and client.

Purpose-built for the browser console: binary messages carry complete
channel frames (header + payload), so the browser reuses the same codec
as the TCP path; text messages carry JSON control objects. Supports the
handshake, masking, 7/16/64-bit lengths, fragmentation, ping/pong and
the close handshake -- and nothing else (no extensions, no subprotocols,
no TLS).
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading
from collections import deque

from .wire import FrameDecoder

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
MAX_MESSAGE = 32 * 1024 * 1024

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WebSocketError(ConnectionError):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _encode_ws_frame(opcode: int, payload: bytes, mask: bool) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask else 0x00
    if n < 126:
        head += bytes([mask_bit | n])
    elif n < 1 << 16:
        head += bytes([mask_bit | 126]) + struct.pack(">H", n)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", n)
    if not mask:
        return head + payload
    key = os.urandom(4)
    masked = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return head + key + masked


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise WebSocketError("connection closed mid-frame")
        buf.extend(chunk)
    return bytes(buf)


def _read_ws_frame(sock: socket.socket) -> tuple[int, bool, bytes]:
    """Returns (opcode, fin, payload) for a single frame."""
    b0, b1 = _read_exact(sock, 2)
    fin = bool(b0 & 0x80)
    opcode = b0 & 0x0F
    masked = bool(b1 & 0x80)
    n = b1 & 0x7F
    if n == 126:
        (n,) = struct.unpack(">H", _read_exact(sock, 2))
    elif n == 127:
        (n,) = struct.unpack(">Q", _read_exact(sock, 8))
    if n > MAX_MESSAGE:
        raise WebSocketError(f"frame of {n} bytes exceeds limit")
    key = _read_exact(sock, 4) if masked else None
    payload = _read_exact(sock, n) if n else b""
    if key is not None:
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return opcode, fin, payload


def _read_ws_message(sock: socket.socket, send_lock: threading.Lock) -> tuple[int, bytes]:
    """Reassembles fragments; answers pings inline. Returns (opcode, data)
    where opcode is TEXT, BINARY or CLOSE."""
    opcode = None
    parts: list[bytes] = []
    while True:
        op, fin, payload = _read_ws_frame(sock)
        if op == OP_PING:
            with send_lock:
                sock.sendall(_encode_ws_frame(OP_PONG, payload, mask=False))
            continue
        if op == OP_PONG:
            continue
        if op == OP_CLOSE:
            return OP_CLOSE, payload
        if op in (OP_TEXT, OP_BINARY):
            if opcode is not None:
                raise WebSocketError("interleaved message start")
            opcode = op
        elif op == OP_CONT:
            if opcode is None:
                raise WebSocketError("continuation without start")
        else:
            raise WebSocketError(f"unsupported opcode {op}")
        parts.append(payload)
        if sum(len(p) for p in parts) > MAX_MESSAGE:
            raise WebSocketError("message exceeds size limit")
        if fin:
            return opcode, b"".join(parts)


class _Client:
    def __init__(self, cid: int, sock: socket.socket):
        self.cid = cid
        self.sock = sock
        self.send_lock = threading.Lock()
        self.decoder = FrameDecoder()
        self.open = True


class WebSocketServer:
    """Broadcast server bridging channel frames to browser clients.

    Inbound binary messages are run through a per-client frame decoder and
    surface via :meth:`pop_frames`; inbound text messages are parsed as
    JSON and surface via :meth:`pop_controls`.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self._lock = threading.Lock()
        self._clients: dict[int, _Client] = {}
        self._frames: deque[tuple[int, int, bytes]] = deque()
        self._controls: deque[tuple[int, dict]] = deque()
        self._next_cid = 1
        self._closed = threading.Event()
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    # -- accept / per-client ----------------------------------------------

    def _accept_loop(self) -> None:
        while not self._closed.is_set():
            try:
                conn, _addr = self._sock.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_client, args=(conn,), daemon=True).start()

    def _serve_client(self, conn: socket.socket) -> None:
        try:
            self._handshake(conn)
        except (OSError, WebSocketError):
            conn.close()
            return
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        with self._lock:
            cid = self._next_cid
            self._next_cid += 1
            client = _Client(cid, conn)
            self._clients[cid] = client
        try:
            while not self._closed.is_set():
                opcode, data = _read_ws_message(conn, client.send_lock)
                if opcode == OP_CLOSE:
                    with client.send_lock:
                        conn.sendall(_encode_ws_frame(OP_CLOSE, data[:2], mask=False))
                    break
                if opcode == OP_BINARY:
                    for msg_type, payload in client.decoder.feed(data):
                        with self._lock:
                            self._frames.append((cid, msg_type, payload))
                elif opcode == OP_TEXT:
                    try:
                        message = json.loads(data.decode("utf-8"))
                    except (UnicodeDecodeError, json.JSONDecodeError):
                        continue
                    if isinstance(message, dict):
                        with self._lock:
                            self._controls.append((cid, message))
        except (OSError, WebSocketError):
            pass
        finally:
            client.open = False
            with self._lock:
                self._clients.pop(cid, None)
            conn.close()

    @staticmethod
    def _handshake(conn: socket.socket) -> None:
        conn.settimeout(5.0)
        request = b""
        while b"\r\n\r\n" not in request:
            chunk = conn.recv(4096)
            if not chunk:
                raise WebSocketError("client vanished during handshake")
            request += chunk
            if len(request) > 65536:
                raise WebSocketError("oversized handshake request")
        head = request.split(b"\r\n\r\n", 1)[0].decode("latin-1")
        lines = head.split("\r\n")
        if not lines[0].startswith("GET "):
            raise WebSocketError("not a GET request")
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if headers.get("upgrade", "").lower() != "websocket" or key is None:
            raise WebSocketError("not a websocket upgrade")
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
            "\r\n"
        )
        conn.sendall(response.encode("latin-1"))
        conn.settimeout(None)

    # -- traffic ------------------------------------------------------------

    def broadcast(self, data: bytes) -> int:
        """Send one binary message to every client; returns how many got it."""
        with self._lock:
            clients = list(self._clients.values())
        frame = _encode_ws_frame(OP_BINARY, data, mask=False)
        delivered = 0
        for client in clients:
            try:
                with client.send_lock:
                    client.sock.sendall(frame)
                delivered += 1
            except OSError:
                client.open = False
        return delivered

    def pop_frames(self) -> list[tuple[int, int, bytes]]:
        """Drain (client_id, msg_type, payload) decoded from binary input."""
        with self._lock:
            out = list(self._frames)
            self._frames.clear()
        return out

    def pop_controls(self) -> list[tuple[int, dict]]:
        with self._lock:
            out = list(self._controls)
            self._controls.clear()
        return out

    def close(self) -> None:
        self._closed.set()
        self._sock.close()
        with self._lock:
            clients = list(self._clients.values())
        for client in clients:
            try:
                client.sock.close()
            except OSError:
                pass


class WebSocketClient:
    """Blocking client, sufficient for tests and local tooling."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._send_lock = threading.Lock()
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        request = (
            f"GET / HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n"
            "\r\n"
        )
        self._sock.sendall(request.encode("latin-1"))
        response = b""
        while b"\r\n\r\n" not in response:
            chunk = self._sock.recv(4096)
            if not chunk:
                raise WebSocketError("server vanished during handshake")
            response += chunk
        status = response.split(b"\r\n", 1)[0].decode("latin-1")
        if " 101 " not in f" {status} ":
            raise WebSocketError(f"handshake rejected: {status}")
        expected = accept_key(key)
        if f"Sec-WebSocket-Accept: {expected}".encode("latin-1") not in response:
            raise WebSocketError("bad accept key")

    def send_binary(self, data: bytes) -> None:
        with self._send_lock:
            self._sock.sendall(_encode_ws_frame(OP_BINARY, data, mask=True))

    def send_text(self, text: str) -> None:
        with self._send_lock:
            self._sock.sendall(_encode_ws_frame(OP_TEXT, text.encode("utf-8"), mask=True))

    def recv_message(self, timeout: float | None = 5.0) -> tuple[int, bytes]:
        """Returns (opcode, data); raises socket.timeout on silence."""
        self._sock.settimeout(timeout)
        return _read_ws_message(self._sock, self._send_lock)

    def close(self) -> None:
        try:
            with self._send_lock:
                self._sock.sendall(_encode_ws_frame(OP_CLOSE, b"", mask=True))
        except OSError:
            pass
        self._sock.close()
