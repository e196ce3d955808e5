"""Teleop channel: framing, codecs, consolidation, latency, transports."""
from .consolidate import POLICY_SOURCE, ConsolidationPolicy, Consolidator
from .latency import LatencyModel, LatencyPipe, schedule
from .observation import (
    OBS_VERSION,
    ObservationDecodeError,
    ObservationFrame,
    compress_observation,
    decompress_observation,
)
from .transport import (
    ACTION_QUEUE_SIZE,
    HEARTBEAT_INTERVAL,
    MISSED_LIMIT,
    LinkStats,
    OperatorEndpoint,
    RobotEndpoint,
    RobotListener,
    connect_operator,
    now_us,
    serve_robot,
)
from .websocket import WebSocketClient, WebSocketError, WebSocketServer
from .wire import (
    HEADER,
    MAGIC,
    MAX_PAYLOAD,
    MSG_ACTION,
    MSG_CONTROL,
    MSG_HEARTBEAT,
    MSG_OBSERVATION,
    VERSION,
    FrameDecoder,
    IntegrityError,
    decode_command,
    decode_frame,
    decode_heartbeat,
    encode_command,
    encode_frame,
    encode_heartbeat,
)

__all__ = [
    "ACTION_QUEUE_SIZE",
    "HEADER",
    "HEARTBEAT_INTERVAL",
    "MAGIC",
    "MAX_PAYLOAD",
    "MISSED_LIMIT",
    "MSG_ACTION",
    "MSG_CONTROL",
    "MSG_HEARTBEAT",
    "MSG_OBSERVATION",
    "OBS_VERSION",
    "POLICY_SOURCE",
    "VERSION",
    "ConsolidationPolicy",
    "Consolidator",
    "FrameDecoder",
    "IntegrityError",
    "LatencyModel",
    "LatencyPipe",
    "LinkStats",
    "ObservationDecodeError",
    "ObservationFrame",
    "OperatorEndpoint",
    "RobotEndpoint",
    "RobotListener",
    "WebSocketClient",
    "WebSocketError",
    "WebSocketServer",
    "compress_observation",
    "connect_operator",
    "decode_command",
    "decode_frame",
    "decode_heartbeat",
    "decompress_observation",
    "encode_command",
    "encode_frame",
    "encode_heartbeat",
    "now_us",
    "schedule",
    "serve_robot",
]
