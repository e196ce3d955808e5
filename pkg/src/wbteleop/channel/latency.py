"""Seeded latency/drop injection for channel robustness testing.

Each message independently draws a delay of ``base_delay + U(-jitter,
+jitter)`` milliseconds and a drop decision with probability
``drop_probability``; both come from one seeded generator, two draws per
message (delay first, then drop), so schedules are reproducible and
insensitive to which messages get dropped.  Delivery times are forced
monotone per direction — a delayed pipe never reorders.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class LatencyModel:
    base_delay: float = 0.0  # ms
    jitter: float = 0.0  # ms, uniform half-width
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_delay < 0 or self.jitter < 0:
            raise ValueError("delay parameters must be non-negative")
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValueError(f"drop_probability must be in [0,1), got {self.drop_probability}")

    def is_identity(self) -> bool:
        return self.base_delay == 0 and self.jitter == 0 and self.drop_probability == 0

    @staticmethod
    def parse(spec: str) -> "LatencyModel":
        """Parse "base,jitter,drop,seed" (trailing parts optional)."""
        parts = [p.strip() for p in spec.split(",")] if spec.strip() else []
        vals = [0.0, 0.0, 0.0, 0.0]
        if len(parts) > 4:
            raise ValueError(f"latency spec has too many fields: {spec!r}")
        for i, p in enumerate(parts):
            vals[i] = float(p)
        return LatencyModel(vals[0], vals[1], vals[2], int(vals[3]))


def schedule(
    sends: Iterable[tuple[int, T]], model: LatencyModel
) -> list[tuple[int, T]]:
    """Map (send_time_us, item) pairs to delivered (arrival_time_us, item) pairs.

    Input must be in send order; output is in arrival order (same order, by
    the monotone-delivery construction), with dropped items removed.
    """
    rng = random.Random(model.seed)
    out: list[tuple[int, T]] = []
    last_arrival = -(1 << 62)
    for send_us, item in sends:
        delay_ms = model.base_delay + rng.uniform(-model.jitter, model.jitter)
        dropped = rng.random() < model.drop_probability
        if dropped:
            continue
        arrival = max(send_us + round(delay_ms * 1000.0), last_arrival)
        last_arrival = arrival
        out.append((arrival, item))
    return out


class LatencyPipe:
    """Live FIFO with injected latency, for use inside a running transport.

    push() stamps each item with its arrival time; pop_ready() hands back
    everything whose arrival time has passed.  Deterministic given the model
    seed and the sequence of push timestamps.
    """

    def __init__(self, model: LatencyModel):
        self.model = model
        self._rng = random.Random(model.seed)
        self._queue: list[tuple[int, object]] = []
        self._last_arrival = -(1 << 62)
        self.dropped = 0

    def push(self, item, now_us: int) -> None:
        delay_ms = self.model.base_delay + self._rng.uniform(-self.model.jitter, self.model.jitter)
        if self._rng.random() < self.model.drop_probability:
            self.dropped += 1
            return
        arrival = max(now_us + round(delay_ms * 1000.0), self._last_arrival)
        self._last_arrival = arrival
        self._queue.append((arrival, item))

    def pop_ready(self, now_us: int) -> list:
        ready = []
        while self._queue and self._queue[0][0] <= now_us:
            ready.append(self._queue.pop(0)[1])
        return ready

    def pending(self) -> int:
        return len(self._queue)

    def next_arrival_us(self) -> int | None:
        return self._queue[0][0] if self._queue else None
