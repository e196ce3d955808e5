"""Per-tick command consolidation: gaps in, complete commands out.

Devices run at their own rates; the control loop ticks at a fixed rate.  The
consolidator fills the gaps with field-class-specific policies:

* velocities (base) — hold the last value while fresher than the TTL, then
  zero (stale motion commands are a safety hazard, so staleness means stop)
* pose deltas (arms) — consumed exactly once; ticks without fresh input get a
  zero delta, and deltas arriving between ticks accumulate
* grippers and torso — hold the last commanded target indefinitely; defaults
  are 0 (open) and the torso's configured rest height

Held fields keep the device id that produced them; policy-filled fields are
tagged "policy".  Staleness compares integer microseconds so traces are
reproducible bit-exact.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..actions import ActionCommand, BaseVelocity, clamp
from ..geometry import DeltaPose

POLICY_SOURCE = "policy"  # tag for fields filled by the consolidator


@dataclass(frozen=True)
class ConsolidationPolicy:
    velocity_ttl: float = 0.25  # seconds
    linear_limit: float = 1.0  # m/s
    angular_limit: float = 1.5  # rad/s

    def __post_init__(self):
        if not self.velocity_ttl > 0:
            raise ValueError(f"velocity_ttl must be > 0, got {self.velocity_ttl}")

    @property
    def ttl_us(self) -> int:
        return round(self.velocity_ttl * 1e6)


class Consolidator:
    """Accumulates incoming commands and emits one complete command per tick."""

    def __init__(self, policy: ConsolidationPolicy | None = None, torso_rest: float = 0.0):
        self.policy = policy or ConsolidationPolicy()
        self._base: BaseVelocity | None = None
        self._base_ts = 0
        self._base_src = POLICY_SOURCE
        self._pending: dict[str, tuple[DeltaPose, str] | None] = {
            "left_arm": None,
            "right_arm": None,
        }
        self._grippers: dict[str, tuple[float, str]] = {}
        self._torso = float(torso_rest)
        self._torso_src = POLICY_SOURCE

    def ingest(self, cmd: ActionCommand) -> None:
        if cmd.base is not None:
            self._base = cmd.base
            self._base_ts = cmd.timestamp
            self._base_src = cmd.sources["base"]
        for arm in ("left_arm", "right_arm"):
            d = getattr(cmd, arm)
            if d is not None:
                pending = self._pending[arm]
                merged = d if pending is None else pending[0].then(d)
                self._pending[arm] = (merged, cmd.sources[arm])
        for grip in ("left_gripper", "right_gripper"):
            v = getattr(cmd, grip)
            if v is not None:
                self._grippers[grip] = (clamp(v, 0.0, 1.0), cmd.sources[grip])
        if cmd.torso is not None:
            self._torso = clamp(cmd.torso, 0.0, 1.0)
            self._torso_src = cmd.sources["torso"]

    def reset(self) -> None:
        """Safety stop: forget all history (velocities zero, grippers open)."""
        self._base = None
        self._base_ts = 0
        self._base_src = POLICY_SOURCE
        self._pending = {"left_arm": None, "right_arm": None}
        self._grippers = {}

    def consolidate(self, now_us: int) -> ActionCommand:
        """Emit the complete command for this tick; every field present."""
        pol = self.policy
        fields: dict = {}
        sources: dict[str, str] = {}

        if self._base is not None and (now_us - self._base_ts) <= pol.ttl_us:
            fields["base"] = self._base.clamped(pol.linear_limit, pol.angular_limit)
            sources["base"] = self._base_src
        else:
            fields["base"] = BaseVelocity.zero()
            sources["base"] = POLICY_SOURCE

        for arm in ("left_arm", "right_arm"):
            pending = self._pending[arm]
            if pending is not None:
                fields[arm], sources[arm] = pending
                self._pending[arm] = None
            else:
                fields[arm] = DeltaPose.zero()
                sources[arm] = POLICY_SOURCE

        for grip in ("left_gripper", "right_gripper"):
            if grip in self._grippers:
                fields[grip], sources[grip] = self._grippers[grip]
            else:
                fields[grip] = 0.0
                sources[grip] = POLICY_SOURCE

        fields["torso"] = self._torso
        sources["torso"] = self._torso_src
        return ActionCommand(timestamp=int(now_us), sources=sources, **fields)
