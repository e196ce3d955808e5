"""Device parsers: raw input events -> partial whole-body commands."""
from .composite import expand_assignment, merge
from .config import ConfigError, ParserConfig
from .events import (
    AxisInput,
    ButtonInput,
    InputEvent,
    KeyInput,
    KeypointFrame,
    TrackedPose,
    event_from_json,
    event_to_json,
    read_event_file,
    write_event_file,
)
from .keyboard import KeyboardParser, parse_keymap
from .sixdof import SixDofParser
from .vision import VisionParser
from .vr import VrParser

PARSER_TYPES = ("keyboard", "sixdof", "vr", "vision")


def build_parser(kind: str, device_id: str, cfg: ParserConfig | None = None, keymap=None):
    """Instantiate a parser by its config-file type name."""
    if kind == "keyboard":
        if not keymap:
            raise ConfigError(f"device {device_id!r}: keyboard requires a keymap")
        return KeyboardParser(device_id, keymap, cfg)
    if kind == "sixdof":
        return SixDofParser(device_id, cfg)
    if kind == "vr":
        return VrParser(device_id, cfg)
    if kind == "vision":
        return VisionParser(device_id, cfg)
    raise ConfigError(f"unknown device type {kind!r} (expected one of {PARSER_TYPES})")
