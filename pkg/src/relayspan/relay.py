"""Slot-by-slot simulation of the relay's delivery strategies.

The relay starts holding both sources' data and must empty two buffers: one
toward source 2 and one toward source 1.  Each slot it observes the pair of
link gains (or, noncausally, the whole future), picks a transmission mode,
and spends part of its power budget as the chosen allocator dictates.

Strategies differ only in how the mode is picked:

* ``NC_ONLY`` / ``NC_FIRST``: coded broadcast whenever both buffers hold
  data, one-directional forwarding to flush the leftover side.  (The two
  names reflect different framings of the same rule and behave
  identically; both are kept so experiment configs can say what they
  mean.)
* ``OPPORTUNISTIC``: per slot, evaluates every mode with data available
  (coded broadcast plus each forwarding direction) and takes the one whose
  current slot would carry the most bits.
* ``ONE_DIRECTIONAL``: never codes; forwards on the stronger link among
  those with pending data.

A coded slot carrying ``X`` bits removes ``X/2`` from each buffer and is
capped once the smaller buffer would go negative; a capped slot's power is
reduced to deliver exactly the cap so no budget is wasted.  The final slot
is counted fractionally, making the span continuous.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, SimulationGuardError
from .power import (
    FadingConfig,
    GainTape,
    PowerConfig,
    _allocation_bits,
    _causal_power,
    _min_slots,
    fwd_slot_throughput,
    nc_slot_throughput,
)

__all__ = [
    "Strategy",
    "Knowledge",
    "Mode",
    "RelayBuffers",
    "SlotRecord",
    "run_relay",
    "write_trace_csv",
    "TRACE_CSV_HEADER",
]

_LN2 = math.log(2.0)

# A slot whose throughput reaches this fraction of the remaining data is
# treated as the finishing slot; covers float dust from the allocators'
# own feasibility slack.
_FINISH_SLACK = 1e-9


class Strategy(str, Enum):
    """Relay mode-selection policies."""

    NC_ONLY = "nc_only"
    NC_FIRST = "nc_first"
    OPPORTUNISTIC = "opportunistic"
    ONE_DIRECTIONAL = "one_directional"


class Knowledge(str, Enum):
    """How much of the gain sequence the allocator may see."""

    CAUSAL = "causal"
    NONCAUSAL = "noncausal"


class Mode(str, Enum):
    """What the relay transmits in one slot."""

    NC = "nc"
    FORWARD_TO_2 = "fwd_to_2"
    FORWARD_TO_1 = "fwd_to_1"


@dataclass(frozen=True)
class RelayBuffers:
    """Data sitting at the relay, by destination.

    Attributes:
        toward_2: Bits received from source 1, awaiting delivery to source 2.
        toward_1: Bits received from source 2, awaiting delivery to source 1.
    """

    toward_2: float
    toward_1: float

    def __post_init__(self) -> None:
        for name in ("toward_2", "toward_1"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")

    @property
    def total(self) -> float:
        return self.toward_2 + self.toward_1


@dataclass(frozen=True)
class SlotRecord:
    """One row of an episode trace."""

    slot: int
    g1: float
    g2: float
    mode: str
    power_w: float
    water_level_w: float
    delivered_bits: float
    remaining_toward_2: float
    remaining_toward_1: float


TRACE_CSV_HEADER = (
    "slot,g1,g2,mode,power_w,water_level_w,delivered_bits,"
    "remaining_toward_2,remaining_toward_1"
)


def write_trace_csv(records: list[SlotRecord], path: str) -> None:
    """Write trace rows to ``path`` with a stable header and float reprs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_HEADER.split(","))
        for r in records:
            writer.writerow(
                [
                    r.slot,
                    repr(r.g1),
                    repr(r.g2),
                    r.mode,
                    repr(r.power_w),
                    repr(r.water_level_w),
                    repr(r.delivered_bits),
                    repr(r.remaining_toward_2),
                    repr(r.remaining_toward_1),
                ]
            )


def _effective_gain(mode: Mode, g1: float, g2: float) -> float:
    if mode is Mode.NC:
        return min(g1, g2)
    return g2 if mode is Mode.FORWARD_TO_2 else g1


def _candidate_modes(
    strategy: Strategy, toward_2: float, toward_1: float, g1: float, g2: float
) -> list[Mode]:
    both = toward_2 > 0.0 and toward_1 > 0.0
    if strategy in (Strategy.NC_ONLY, Strategy.NC_FIRST):
        if both:
            return [Mode.NC]
        return [Mode.FORWARD_TO_2 if toward_2 > 0.0 else Mode.FORWARD_TO_1]
    if strategy is Strategy.ONE_DIRECTIONAL:
        if both:
            return [Mode.FORWARD_TO_2 if g2 >= g1 else Mode.FORWARD_TO_1]
        return [Mode.FORWARD_TO_2 if toward_2 > 0.0 else Mode.FORWARD_TO_1]
    modes: list[Mode] = []
    if both:
        modes.append(Mode.NC)
    if toward_2 > 0.0:
        modes.append(Mode.FORWARD_TO_2)
    if toward_1 > 0.0:
        modes.append(Mode.FORWARD_TO_1)
    return modes


def _virtual_mean_gain(
    strategy: Strategy, mode: Mode, fading: FadingConfig, both_pending: bool
) -> float:
    """Stand-in gain for unseen future slots under the causal allocator."""
    if mode is Mode.NC:
        return fading.mean_min_gain
    if strategy is Strategy.ONE_DIRECTIONAL and both_pending:
        # Future slots will again pick the stronger link.
        return fading.mean_max_gain
    return fading.mean_gain_2 if mode is Mode.FORWARD_TO_2 else fading.mean_gain_1


def _future_effective(
    strategy: Strategy, mode: Mode, pair: tuple[float, float], both_pending: bool
) -> float:
    """Effective gain a future slot would see under the noncausal planner."""
    g1, g2 = pair
    if mode is Mode.NC:
        return min(g1, g2)
    if strategy is Strategy.ONE_DIRECTIONAL and both_pending:
        return max(g1, g2)
    return g2 if mode is Mode.FORWARD_TO_2 else g1


def _plan_slot(
    strategy: Strategy,
    mode: Mode,
    knowledge: Knowledge,
    tape: GainTape,
    slot: int,
    remaining_bits: float,
    budget: float,
    fading: FadingConfig,
    cfg: PowerConfig,
    both_pending: bool,
    max_slots: int,
) -> tuple[float, float]:
    """Return (power, water level) for the current slot in the given mode."""
    g1, g2 = tape[slot]
    h_now = _effective_gain(mode, g1, g2) / cfg.noise_w
    factor = 2.0 if mode is Mode.NC else 1.0
    if knowledge is Knowledge.CAUSAL:
        h_virtual = _virtual_mean_gain(strategy, mode, fading, both_pending) / cfg.noise_w
        decision = _causal_power(
            h_now, h_virtual, remaining_bits, budget, factor, cfg, max_slots
        )
        return decision.power_w, decision.water_level

    cache = [h_now]

    def h_prefix(n: int) -> np.ndarray:
        while len(cache) < n:
            pair = tape[slot + len(cache)]
            cache.append(_future_effective(strategy, mode, pair, both_pending) / cfg.noise_w)
        return np.asarray(cache[:n])

    _, alloc = _min_slots(h_prefix, remaining_bits, budget, factor, cfg, max_slots)
    return float(alloc.powers[0]), alloc.water_level


def _slot_bits(mode: Mode, g1: float, g2: float, power: float, cfg: PowerConfig) -> float:
    if mode is Mode.NC:
        return nc_slot_throughput(g1, g2, power, cfg)
    return fwd_slot_throughput(_effective_gain(mode, g1, g2), power, cfg)


def _power_for_bits(bits: float, gain: float, factor: float, cfg: PowerConfig) -> float:
    """Invert the throughput curve: power that carries exactly ``bits``."""
    exponent = bits * _LN2 / (factor * cfg.bits_per_unit)
    return math.expm1(exponent) * cfg.noise_w / gain


def run_relay(
    strategy: Strategy,
    buffers: RelayBuffers,
    fading: FadingConfig,
    cfg: PowerConfig,
    knowledge: Knowledge,
    rng: np.random.Generator,
    *,
    max_slots: int = 100_000,
    trace: Optional[list[SlotRecord]] = None,
) -> float:
    """Simulate one delivery episode and return its span in slots.

    Gains are drawn per slot from ``rng`` via a :class:`GainTape`, so two
    runs with identically seeded generators see identical channels even if
    their strategies look different distances ahead.  The final slot
    contributes only the fraction needed to finish, and a capped slot's
    power is lowered to deliver exactly its cap, so total delivered data
    matches the initial buffers and the budget is never overdrawn.

    Args:
        strategy: Mode-selection policy.
        buffers: Initial relay buffers (bits).
        fading: Channel distribution feeding the gain tape and the causal
            planner's virtual future.
        cfg: Radio parameters; ``cfg.budget_w`` is the episode budget.
        knowledge: Causal or noncausal allocator.
        rng: Seeded generator driving the gains.
        max_slots: Guard cap on episode length.
        trace: Optional list that receives one :class:`SlotRecord` per
            slot, including the final fractional one.

    Raises:
        SimulationGuardError: If the episode exceeds ``max_slots``, the
            budget runs dry early, or an allocator's own guard trips.
    """
    toward_2 = buffers.toward_2
    toward_1 = buffers.toward_1
    if toward_2 == 0.0 and toward_1 == 0.0:
        return 0.0
    tape = GainTape(fading, rng)
    budget = cfg.budget_w

    for slot in range(max_slots):
        if budget <= 0.0:
            raise SimulationGuardError("power budget exhausted before delivery completed")
        g1, g2 = tape[slot]
        both = toward_2 > 0.0 and toward_1 > 0.0
        remaining = toward_2 + toward_1
        chosen: tuple[Mode, float, float, float] | None = None
        guard: SimulationGuardError | None = None
        for mode in _candidate_modes(strategy, toward_2, toward_1, g1, g2):
            try:
                power, level = _plan_slot(
                    strategy, mode, knowledge, tape, slot, remaining, budget,
                    fading, cfg, both, max_slots,
                )
            except SimulationGuardError as exc:
                # A mode that cannot cover the data (dead link, throughput
                # cap) drops out of the running; only losing every mode is
                # fatal.
                guard = exc
                continue
            bits = _slot_bits(mode, g1, g2, power, cfg)
            if chosen is None or bits > chosen[3]:
                chosen = (mode, power, level, bits)
        if chosen is None:
            assert guard is not None
            raise guard
        mode, power, level, bits = chosen

        if mode is Mode.NC:
            if toward_2 == toward_1 and bits >= remaining * (1.0 - _FINISH_SLACK):
                frac = min(1.0, remaining / bits)
                if trace is not None:
                    trace.append(
                        SlotRecord(slot, g1, g2, mode.value, power, level, remaining, 0.0, 0.0)
                    )
                return slot + frac
            cap = 2.0 * min(toward_2, toward_1)
            if bits > cap:
                power = _power_for_bits(cap, min(g1, g2), 2.0, cfg)
                bits = cap
            half = bits / 2.0
            toward_2 = max(0.0, toward_2 - half)
            toward_1 = max(0.0, toward_1 - half)
        else:
            gain = _effective_gain(mode, g1, g2)
            target = toward_2 if mode is Mode.FORWARD_TO_2 else toward_1
            other = remaining - target
            if other == 0.0 and bits >= target * (1.0 - _FINISH_SLACK):
                frac = min(1.0, target / bits)
                if trace is not None:
                    trace.append(
                        SlotRecord(slot, g1, g2, mode.value, power, level, target, 0.0, 0.0)
                    )
                return slot + frac
            if bits > target:
                power = _power_for_bits(target, gain, 1.0, cfg)
                bits = target
            if mode is Mode.FORWARD_TO_2:
                toward_2 = max(0.0, toward_2 - bits)
            else:
                toward_1 = max(0.0, toward_1 - bits)

        budget = max(0.0, budget - power)
        if trace is not None:
            trace.append(
                SlotRecord(slot, g1, g2, mode.value, power, level, bits, toward_2, toward_1)
            )
    raise SimulationGuardError(f"episode still running after {max_slots} slots")
