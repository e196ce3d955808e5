"""Command-line entry point.

Exit codes are part of the contract:

* 0 — run completed cleanly (task success or not; see the printed report)
* 1 — replay divergence: the recording does not reproduce, or is corrupt
* 2 — configuration error (message names file and line where known)
* 3 — endpoint error: connection refused, lost, or unbindable
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .interfaces.config import ConfigError
from .recorder import RecordingError, replay_session
from .session import (
    DEFAULT_TICK_RATE,
    SessionConfig,
    load_session_config,
    parse_endpoint,
    run_connect,
    run_local,
    run_serve,
)

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_CONFIG = 2
EXIT_CONNECTION = 3


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbteleop",
        description="Whole-body teleoperation for simulated mobile manipulators.",
    )
    parser.add_argument(
        "recording",
        nargs="?",
        help="recording to replay (replay mode only)",
    )
    parser.add_argument(
        "--mode",
        choices=("local", "serve", "connect", "replay"),
        default="local",
        help="local loop, robot server, operator client, or replay check",
    )
    parser.add_argument("--config", help="session config YAML")
    parser.add_argument("--endpoint", help="host:port for serve/connect")
    parser.add_argument("--task", help="bundled task name or task YAML path")
    parser.add_argument("--embodiment", help="bundled embodiment name or YAML path")
    parser.add_argument("--seed", type=int, help="scene randomization seed")
    parser.add_argument("--record", help="write a session recording here")
    parser.add_argument("--script", help="scripted input events (NDJSON)")
    parser.add_argument(
        "--latency",
        help='inject channel latency: "base_ms,jitter_ms,drop_prob,seed"',
    )
    parser.add_argument(
        "--ticks-per-second",
        type=int,
        help=f"control rate (default {DEFAULT_TICK_RATE})",
    )
    parser.add_argument("--ws-port", type=int, help="serve browser consoles on this port")
    parser.add_argument("--max-ticks", type=int, help="hard tick limit")
    return parser


def _apply_overrides(config: SessionConfig, args: argparse.Namespace) -> SessionConfig:
    from .channel.latency import LatencyModel

    updates: dict = {}
    if args.task is not None:
        updates["task"] = args.task
    if args.embodiment is not None:
        updates["embodiment"] = args.embodiment
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.record is not None:
        updates["record_path"] = args.record
    if args.script is not None:
        updates["script_path"] = args.script
    if args.ticks_per_second is not None:
        updates["ticks_per_second"] = args.ticks_per_second
    if args.ws_port is not None:
        updates["ws_port"] = args.ws_port
    if args.max_ticks is not None:
        updates["max_ticks"] = args.max_ticks
    if args.endpoint is not None:
        updates["endpoint"] = parse_endpoint(args.endpoint)
    if args.latency is not None:
        try:
            updates["latency"] = LatencyModel.parse(args.latency)
        except ValueError as exc:
            raise ConfigError(f"bad --latency: {exc}") from exc
    return replace(config, **updates) if updates else config


def _run_replay(path: str | None) -> int:
    if not path:
        raise ConfigError("replay mode needs a recording path")
    report = replay_session(path)
    div = "none" if report.first_divergence is None else str(report.first_divergence)
    print(
        f"ticks={report.ticks} first_divergence={div} "
        f"recorded_hash={report.recorded_hash} replayed_hash={report.replayed_hash} "
        f"success={report.success}"
    )
    return EXIT_OK if report.clean else EXIT_DIVERGED


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        if args.mode == "replay":
            return _run_replay(args.recording)

        if args.recording is not None:
            raise ConfigError(f"positional argument {args.recording!r} only applies to replay mode")
        config = load_session_config(args.config) if args.config else SessionConfig()
        config = _apply_overrides(config, args)

        if args.mode == "local":
            report = run_local(config)
        elif args.mode == "serve":
            report = run_serve(config)
        else:
            report = run_connect(config)
        print(report.summary())
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RecordingError as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConnectionRefusedError, ConnectionResetError, TimeoutError) as exc:
        print(f"connection error: {exc}", file=sys.stderr)
        return EXIT_CONNECTION
    except OSError as exc:
        print(f"endpoint error: {exc}", file=sys.stderr)
        return EXIT_CONNECTION


if __name__ == "__main__":
    sys.exit(main())
