"""Compositor: assembles one ActionCommand per tick from device partials.

The user assigns each body part to at most one device; group aliases
``arms`` and ``grippers`` expand to the left/right pair.  Assignment is
validated once at session start — runtime merging never raises.
"""
from __future__ import annotations

from ..actions import COMMAND_FIELDS, ActionCommand, PartialCommand
from .config import ConfigError

_GROUP_ALIASES = {
    "arms": ("left_arm", "right_arm"),
    "grippers": ("left_gripper", "right_gripper"),
}


def expand_assignment(raw: dict, known_devices: set[str] | None = None) -> dict[str, str]:
    """Validate and expand a body-part -> device-id table.

    Raises ConfigError on unknown parts, duplicate claims on one part, or
    (when ``known_devices`` is given) references to undeclared devices.
    """
    expanded: dict[str, str] = {}
    for part, device in raw.items():
        parts = _GROUP_ALIASES.get(part, (part,))
        for p in parts:
            if p not in COMMAND_FIELDS:
                raise ConfigError(f"unknown body part {part!r} in assignment")
            if p in expanded:
                raise ConfigError(
                    f"body part {p!r} assigned to both {expanded[p]!r} and {device!r}"
                )
            expanded[p] = str(device)
    if known_devices is not None:
        for part, device in expanded.items():
            if device not in known_devices:
                raise ConfigError(f"assignment {part!r}: unknown device {device!r}")
    return expanded


def merge(
    partials: list[PartialCommand],
    assignment: dict[str, str],
    timestamp: int,
) -> ActionCommand:
    """Take each field from its assigned device's partial; drop everything else."""
    by_device: dict[str, PartialCommand] = {}
    for p in partials:
        for device in set(p.sources.values()):
            by_device[device] = p

    fields: dict = {}
    sources: dict[str, str] = {}
    for part, device in assignment.items():
        partial = by_device.get(device)
        if partial is None:
            continue
        value = getattr(partial, part)
        if value is not None and partial.sources.get(part) == device:
            fields[part] = value
            sources[part] = device
    return ActionCommand(timestamp=int(timestamp), sources=sources, **fields)
