"""Relay power allocation across fading slots.

The relay holds a fixed transmit budget for the whole episode and decides
per slot how much of it to spend.  A slot with channel power gain ``g`` and
spent power ``p`` carries ``W * T * log2(1 + g * p / noise)`` bits in one
direction; a coded broadcast carries twice that, paced by the weaker of the
two link gains.  Spreading the budget over ``n`` slots is the classic
parallel-channel problem, solved by water filling over the effective gains
``g / noise``.

Two knowledge models are provided.  With the whole gain sequence known in
advance, :func:`noncausal_min_slots` finds the fewest slots whose
water-filled throughput covers the data.  Knowing only the current gain and
the fading distribution, :func:`causal_allocate_slot` pads the horizon with
virtual future slots frozen at the distribution's mean effective gain,
water-fills, and commits only the current slot's share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import DomainError, SimulationGuardError

__all__ = [
    "PowerConfig",
    "FadingConfig",
    "PowerAllocation",
    "CausalDecision",
    "GainTape",
    "draw_slot_gains",
    "nc_slot_throughput",
    "fwd_slot_throughput",
    "waterfill",
    "noncausal_min_slots",
    "causal_allocate_slot",
]

_LN2 = math.log(2.0)

# Relative slack when testing whether achieved throughput covers a data
# target, so that a target sitting exactly on a feasibility boundary is not
# pushed over it by the last ulp of a float sum.
_FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class PowerConfig:
    """Radio parameters shared by every allocation routine.

    Attributes:
        budget_w: Transmit power budget for the whole episode, in watts;
            each slot's allocation is drawn down from this single pool.
        noise_w: Effective noise power the received signal competes with,
            in watts.  A slot's signal-to-noise ratio is
            ``gain * power / noise_w``.
        bandwidth_hz: Channel bandwidth in hertz.
        slot_duration_s: Slot length in seconds; together with the
            bandwidth it converts spectral efficiency into bits per slot.
    """

    budget_w: float
    noise_w: float
    bandwidth_hz: float
    slot_duration_s: float = 1.0

    def __post_init__(self) -> None:
        for name in ("budget_w", "noise_w", "bandwidth_hz", "slot_duration_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be finite and positive, got {value!r}")

    @property
    def bits_per_unit(self) -> float:
        """Bits carried by one slot per unit of ``log2(1 + snr)``."""
        return self.bandwidth_hz * self.slot_duration_s


@dataclass(frozen=True)
class FadingConfig:
    """Rayleigh-fading channel description for the two links.

    Channel power gains are exponential with the configured means, drawn
    independently per link and per slot.  With ``deterministic`` set, draws
    are frozen at the means instead, which turns every allocator into its
    flat-channel special case (useful for exactness tests).
    """

    mean_gain_1: float = 1.0
    mean_gain_2: float = 1.0
    deterministic: bool = False
    seed: int | None = None

    def __post_init__(self) -> None:
        for name in ("mean_gain_1", "mean_gain_2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be finite and positive, got {value!r}")

    @property
    def mean_min_gain(self) -> float:
        """Mean of the effective coded-broadcast gain ``min(g1, g2)``.

        The minimum of independent exponentials is exponential with the
        summed rate, hence the harmonic-style mean.
        """
        if self.deterministic:
            return min(self.mean_gain_1, self.mean_gain_2)
        return 1.0 / (1.0 / self.mean_gain_1 + 1.0 / self.mean_gain_2)

    @property
    def mean_max_gain(self) -> float:
        """Mean of the best-link gain ``max(g1, g2)``."""
        if self.deterministic:
            return max(self.mean_gain_1, self.mean_gain_2)
        return self.mean_gain_1 + self.mean_gain_2 - self.mean_min_gain

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def draw_slot_gains(fading: FadingConfig, rng: np.random.Generator) -> tuple[float, float]:
    """Draw one slot's pair of link power gains."""
    if fading.deterministic:
        return fading.mean_gain_1, fading.mean_gain_2
    return (
        float(rng.exponential(fading.mean_gain_1)),
        float(rng.exponential(fading.mean_gain_2)),
    )


class GainTape:
    """Lazily materialized per-slot gain sequence backed by one stream.

    Indexing extends the tape as far as needed, always drawing pairs in
    slot order, so every consumer of the same seeded stream sees the same
    gain at the same slot regardless of how far ahead any of them peeked.
    """

    def __init__(self, fading: FadingConfig, rng: np.random.Generator) -> None:
        self._fading = fading
        self._rng = rng
        self._pairs: list[tuple[float, float]] = []

    def __getitem__(self, slot: int) -> tuple[float, float]:
        if slot < 0:
            raise DomainError("slot index must be non-negative")
        while len(self._pairs) <= slot:
            self._pairs.append(draw_slot_gains(self._fading, self._rng))
        return self._pairs[slot]

    def pairs(self, start: int) -> Iterator[tuple[float, float]]:
        """Yield gain pairs from ``start`` onward, extending forever."""
        slot = start
        while True:
            yield self[slot]
            slot += 1


def nc_slot_throughput(g1: float, g2: float, p: float, cfg: PowerConfig) -> float:
    """Bits delivered by one coded-broadcast slot, summed over both flows.

    The broadcast must be decodable by both sources, so the weaker gain
    sets the rate; serving both directions at once doubles the count.
    """
    if p < 0.0:
        raise DomainError(f"power must be non-negative, got {p!r}")
    snr = min(g1, g2) * p / cfg.noise_w
    return 2.0 * cfg.bits_per_unit * math.log1p(snr) / _LN2


def fwd_slot_throughput(g: float, p: float, cfg: PowerConfig) -> float:
    """Bits delivered by one forwarding slot, toward a single source."""
    if p < 0.0:
        raise DomainError(f"power must be non-negative, got {p!r}")
    snr = g * p / cfg.noise_w
    return cfg.bits_per_unit * math.log1p(snr) / _LN2


@dataclass(frozen=True)
class PowerAllocation:
    """Water-filling result: one power per slot plus the common level.

    Attributes:
        powers: Non-negative per-slot powers, summing to the budget.
        water_level: The level ``nu`` with ``p_k = max(0, nu - 1/h_k)``.
    """

    powers: np.ndarray
    water_level: float

    def __post_init__(self) -> None:
        arr = np.array(self.powers, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "powers", arr)

    @classmethod
    def empty(cls) -> "PowerAllocation":
        return cls(powers=np.zeros(0), water_level=0.0)

    @property
    def n_slots(self) -> int:
        return int(self.powers.size)

    @property
    def total_w(self) -> float:
        return float(np.sum(self.powers))


def waterfill(effective_gains: Iterable[float], budget: float) -> PowerAllocation:
    """Split a power budget over parallel slots by water filling.

    Args:
        effective_gains: Per-slot gain-to-noise ratios ``h_k`` (1/watts);
            all must be positive.
        budget: Total power to distribute, > 0.

    Returns:
        The allocation ``p_k = max(0, nu - 1/h_k)`` whose level ``nu``
        spends the budget exactly.  ``nu`` is found in closed form: with
        inverse gains sorted ascending, the level that activates exactly
        the ``m`` best slots is ``(budget + sum of their inverses) / m``,
        and the right ``m`` is the largest one whose level still clears its
        ``m``-th inverse gain.
    """
    h = np.asarray(list(effective_gains) if not isinstance(effective_gains, np.ndarray) else effective_gains, dtype=float)
    if h.ndim != 1 or h.size == 0:
        raise DomainError("at least one effective gain is required")
    if not np.all(np.isfinite(h)) or np.any(h <= 0.0):
        raise DomainError("effective gains must be finite and positive")
    if not math.isfinite(budget) or budget <= 0.0:
        raise DomainError(f"budget must be finite and positive, got {budget!r}")
    inv = 1.0 / h
    inv_sorted = np.sort(inv)
    counts = np.arange(1, h.size + 1, dtype=float)
    levels = (budget + np.cumsum(inv_sorted)) / counts
    # levels[0] > inv_sorted[0] always, so the set below is nonempty.
    active = np.flatnonzero(levels > inv_sorted)
    level = float(levels[active[-1]])
    powers = np.maximum(0.0, level - inv)
    return PowerAllocation(powers=powers, water_level=level)


def _allocation_bits(h: np.ndarray, powers: np.ndarray, factor: float, cfg: PowerConfig) -> float:
    """Total bits of an allocation over effective gains ``h``."""
    return factor * cfg.bits_per_unit * float(np.sum(np.log1p(h * powers))) / _LN2


def _min_slots(
    h_prefix: Callable[[int], np.ndarray],
    data_bits: float,
    budget: float,
    factor: float,
    cfg: PowerConfig,
    max_slots: int,
) -> tuple[int, PowerAllocation]:
    """Smallest slot count whose water-filled throughput covers the data.

    ``h_prefix(n)`` must return the first ``n`` effective gains.  Adding a
    slot never shrinks the achievable throughput, so the first count that
    covers the target is minimal.
    """
    target = data_bits * (1.0 - _FEASIBILITY_SLACK)
    for n in range(1, max_slots + 1):
        h = h_prefix(n)
        alloc = waterfill(h, budget)
        if _allocation_bits(h, alloc.powers, factor, cfg) >= target:
            return n, alloc
    raise SimulationGuardError(
        f"data not deliverable within {max_slots} slots at this budget"
    )


def noncausal_min_slots(
    gain_stream: Iterable[tuple[float, float]],
    data_bits: float,
    cfg: PowerConfig,
    *,
    budget_w: float | None = None,
    max_slots: int = 100_000,
) -> tuple[int, PowerAllocation]:
    """Fewest coded-broadcast slots that flush the data, gains known ahead.

    Tries horizons of 1, 2, ... slots; each candidate water-fills the full
    budget over the effective gains ``min(g1, g2) / noise`` of its slots
    and checks whether the summed two-directional throughput reaches
    ``data_bits``.

    Args:
        gain_stream: Per-slot ``(g1, g2)`` pairs, consumed lazily in order.
        data_bits: Data to deliver (sum of both directions); 0 yields an
            empty allocation.
        cfg: Radio parameters; ``budget_w`` overrides the config's budget.

    Returns:
        ``(n_slots, allocation)``.

    Raises:
        SimulationGuardError: If ``max_slots`` horizons cannot cover the
            data or the gain stream runs dry.
    """
    if data_bits < 0.0 or not math.isfinite(data_bits):
        raise DomainError(f"data_bits must be finite and non-negative, got {data_bits!r}")
    if data_bits == 0.0:
        return 0, PowerAllocation.empty()
    budget = cfg.budget_w if budget_w is None else budget_w
    stream = iter(gain_stream)
    cache: list[float] = []

    def h_prefix(n: int) -> np.ndarray:
        while len(cache) < n:
            try:
                g1, g2 = next(stream)
            except StopIteration:
                raise SimulationGuardError(
                    f"gain stream exhausted after {len(cache)} slots"
                ) from None
            cache.append(min(g1, g2) / cfg.noise_w)
        return np.asarray(cache[:n])

    return _min_slots(h_prefix, data_bits, budget, 2.0, cfg, max_slots)


@dataclass(frozen=True)
class CausalDecision:
    """Outcome of one causal allocation step.

    Attributes:
        power_w: Power committed to the current slot.
        water_level: Water level of the horizon that first covered the
            remaining data.
        virtual_slots: How many mean-gain future slots that horizon
            assumed beyond the current slot.
    """

    power_w: float
    water_level: float
    virtual_slots: int


def _causal_power(
    h_now: float,
    h_virtual: float,
    data_bits: float,
    budget: float,
    factor: float,
    cfg: PowerConfig,
    max_virtual: int,
) -> CausalDecision:
    # log(1+x) <= x bounds everything any horizon could ever deliver.
    h_best = max(h_now, h_virtual)
    if factor * cfg.bits_per_unit * h_best * budget / _LN2 < data_bits * (1.0 - _FEASIBILITY_SLACK):
        raise SimulationGuardError(
            "remaining data exceeds the throughput cap of the remaining budget"
        )
    target = data_bits * (1.0 - _FEASIBILITY_SLACK)
    for delta in range(max_virtual + 1):
        h = np.empty(1 + delta)
        h[0] = h_now
        h[1:] = h_virtual
        alloc = waterfill(h, budget)
        if _allocation_bits(h, alloc.powers, factor, cfg) >= target:
            return CausalDecision(
                power_w=float(alloc.powers[0]),
                water_level=alloc.water_level,
                virtual_slots=delta,
            )
    raise SimulationGuardError(
        f"no horizon within {max_virtual} virtual slots covers the remaining data"
    )


def causal_allocate_slot(
    current_gains: tuple[float, float],
    remaining_data: float,
    remaining_budget: float,
    fading: FadingConfig,
    cfg: PowerConfig,
    *,
    max_virtual: int = 100_000,
) -> CausalDecision:
    """Choose the current slot's power knowing only the present gains.

    Future slots are stand-ins frozen at the mean effective gain
    ``E[min(g1, g2)]``.  Starting from the current slot alone, one virtual
    slot is appended at a time until water filling the remaining budget
    over the horizon covers the remaining data; the current slot's share of
    that first feasible horizon is committed (possibly zero when the
    current gain sits below the water level).

    Args:
        current_gains: Actual ``(g1, g2)`` of the present slot.
        remaining_data: Bits still to deliver, > 0.
        remaining_budget: Unspent power, > 0.
        fading: Distribution whose mean effective gain fills the horizon.
        cfg: Radio parameters (the budget field is ignored here).

    Raises:
        SimulationGuardError: If no horizon can cover the data, even with
            unlimited virtual slots (throughput cap) or within
            ``max_virtual`` of them.
    """
    if not math.isfinite(remaining_data) or remaining_data <= 0.0:
        raise DomainError(f"remaining_data must be positive, got {remaining_data!r}")
    if not math.isfinite(remaining_budget) or remaining_budget <= 0.0:
        raise DomainError(f"remaining_budget must be positive, got {remaining_budget!r}")
    g1, g2 = current_gains
    h_now = min(g1, g2) / cfg.noise_w
    h_virtual = fading.mean_min_gain / cfg.noise_w
    return _causal_power(h_now, h_virtual, remaining_data, remaining_budget, 2.0, cfg, max_virtual)
