"""Scheduling when the channel wanders over finitely many rate states.

Each slot the pair of link capacities is drawn from a known PMF over the
lexicographically ordered grid ``levels x levels``.  The transmitting nodes
cannot observe the draw in advance; they commit to an *assumed* state and
the slot succeeds only if the assumed capacities are element-wise less than
or equal to the actual ones.  A successful slot delivers the assumed
state's cross-point rates, which keep both backlogs on their joint ray so
they empty together.

The figure of merit of an assumed state is its alpha coefficient: success
probability times cross-point sum rate, i.e. the expected delivered data
per slot.  Maximizing expected delivery over policies is linear in the
policy weights, so some single state is optimal; :func:`optimal_policy`
returns that degenerate policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBacklogError, DomainError, SimulationGuardError
from .rates import Backlog, LinkCapacities, RatePoint, cross_point

__all__ = [
    "RateLevels",
    "FiniteStateModel",
    "StatePolicy",
    "AlphaVector",
    "enumerate_states",
    "success_set",
    "success_probability",
    "alpha_coefficients",
    "optimal_policy",
    "expected_rate",
    "simulate_finite_state",
    "simulate_spans",
]

_PMF_TOL = 1e-12


@dataclass(frozen=True)
class RateLevels:
    """Strictly increasing positive rate levels a link can take."""

    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if len(self.levels) < 1:
            raise DomainError("at least one rate level is required")
        for value in self.levels:
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"rate levels must be finite and positive, got {value!r}")
        if any(a >= b for a, b in zip(self.levels, self.levels[1:])):
            raise DomainError(f"rate levels must be strictly increasing, got {self.levels}")

    @property
    def n(self) -> int:
        return len(self.levels)


def enumerate_states(levels: RateLevels) -> tuple[LinkCapacities, ...]:
    """List all ``n**2`` joint capacity states in lexicographic order.

    The first link's level index varies slowest, so for levels ``(1, 2)``
    the order is ``(1,1), (1,2), (2,1), (2,2)``.
    """
    return tuple(
        LinkCapacities(c1, c2) for c1 in levels.levels for c2 in levels.levels
    )


def _validate_pmf(values: tuple[float, ...], what: str) -> None:
    if len(values) == 0:
        raise DomainError(f"{what} must be nonempty")
    for value in values:
        if not math.isfinite(value) or value < 0.0:
            raise DomainError(f"{what} entries must be finite and non-negative, got {value!r}")
    total = math.fsum(values)
    if abs(total - 1.0) > _PMF_TOL:
        raise DomainError(f"{what} must sum to 1, got {total!r}")


@dataclass(frozen=True)
class FiniteStateModel:
    """A PMF over the joint channel states.

    Attributes:
        states: Ordered capacity pairs, all ``n**2`` of them.
        probs: Probability of each state, summing to one.
    """

    states: tuple[LinkCapacities, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.states) != len(self.probs):
            raise DomainError(
                f"{len(self.states)} states but {len(self.probs)} probabilities"
            )
        _validate_pmf(self.probs, "state PMF")

    @classmethod
    def from_levels(cls, levels: RateLevels, probs: "list[float] | tuple[float, ...] | np.ndarray") -> "FiniteStateModel":
        """Attach a PMF to the enumerated states of the given levels."""
        return cls(states=enumerate_states(levels), probs=tuple(float(p) for p in probs))

    @property
    def n_states(self) -> int:
        return len(self.states)


def success_set(i: int, model: FiniteStateModel) -> tuple[int, ...]:
    """Indices of actual states under which assumed state ``i`` succeeds.

    Success requires the assumed capacities to be element-wise less than or
    equal to the actual ones, so the set collects every state that
    dominates state ``i`` (including itself).
    """
    if not 0 <= i < model.n_states:
        raise DomainError(f"state index {i} out of range 0..{model.n_states - 1}")
    assumed = model.states[i]
    return tuple(
        k
        for k, actual in enumerate(model.states)
        if assumed.c1 <= actual.c1 and assumed.c2 <= actual.c2
    )


def success_probability(i: int, model: FiniteStateModel) -> float:
    """Probability that a slot transmitted at assumed state ``i`` succeeds."""
    return math.fsum(model.probs[k] for k in success_set(i, model))


@dataclass(frozen=True)
class AlphaVector:
    """Per-state expected delivered sum rate (success probability times
    cross-point sum rate)."""

    alphas: tuple[float, ...]


@dataclass(frozen=True)
class StatePolicy:
    """Distribution over assumed states, one weight per model state."""

    q: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        _validate_pmf(self.q, "policy weights")

    @classmethod
    def degenerate(cls, n_states: int, index: int) -> "StatePolicy":
        """Policy that always assumes the state at ``index``."""
        if not 0 <= index < n_states:
            raise DomainError(f"state index {index} out of range 0..{n_states - 1}")
        weights = [0.0] * n_states
        weights[index] = 1.0
        return cls(q=tuple(weights))

    @property
    def is_degenerate(self) -> bool:
        return any(v == 1.0 for v in self.q)

    @property
    def assumed_index(self) -> int:
        """The single assumed state of a degenerate policy."""
        if not self.is_degenerate:
            raise DomainError("policy is not degenerate")
        return self.q.index(1.0)


def _state_rates(model: FiniteStateModel, backlog: Backlog) -> list[RatePoint]:
    return [cross_point(caps, backlog) for caps in model.states]


def alpha_coefficients(model: FiniteStateModel, backlog: Backlog) -> AlphaVector:
    """Expected delivered sum rate of each assumed state on the backlog ray.

    Raises:
        DegenerateBacklogError: If both backlogs are zero (no ray).
    """
    if backlog.is_zero:
        raise DegenerateBacklogError("alpha coefficients need a nonzero backlog ray")
    rates = _state_rates(model, backlog)
    alphas = tuple(
        success_probability(i, model) * (rates[i].x + rates[i].y)
        for i in range(model.n_states)
    )
    return AlphaVector(alphas=alphas)


def optimal_policy(model: FiniteStateModel, backlog: Backlog) -> StatePolicy:
    """Pick the assumed state with the largest alpha coefficient.

    Expected delivery per slot is linear in the policy weights, so putting
    all weight on the best single state is optimal.  Ties go to the
    lexicographically smallest state, the conservative choice with the
    higher success probability.
    """
    alphas = alpha_coefficients(model, backlog).alphas
    best = max(alphas)
    index = alphas.index(best)
    return StatePolicy.degenerate(model.n_states, index)


def expected_rate(
    model: FiniteStateModel, policy: StatePolicy, backlog: Backlog
) -> tuple[float, float]:
    """Expected per-slot delivered rates ``(E[r1], E[r2])`` under a policy.

    Both expectations share each state's success probability factor, and
    every cross point lies on the backlog ray, so their ratio equals
    ``b2 / b1`` whenever both backlogs are positive.
    """
    if backlog.is_zero:
        raise DegenerateBacklogError("expected rate needs a nonzero backlog ray")
    if len(policy.q) != model.n_states:
        raise DomainError(
            f"policy has {len(policy.q)} weights for {model.n_states} states"
        )
    rates = _state_rates(model, backlog)
    e1 = math.fsum(
        policy.q[i] * success_probability(i, model) * rates[i].x
        for i in range(model.n_states)
    )
    e2 = math.fsum(
        policy.q[i] * success_probability(i, model) * rates[i].y
        for i in range(model.n_states)
    )
    return e1, e2


def _success_matrix(model: FiniteStateModel) -> np.ndarray:
    n = model.n_states
    matrix = np.zeros((n, n), dtype=bool)
    for i in range(n):
        matrix[i, list(success_set(i, model))] = True
    return matrix


def _draw_index(cum: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.searchsorted(cum, rng.random(), side="right"))


def simulate_finite_state(
    model: FiniteStateModel,
    backlog: Backlog,
    policy: StatePolicy,
    rng: np.random.Generator,
    *,
    recompute_each_slot: bool = False,
    max_slots: int = 1_000_000,
) -> float:
    """Simulate one episode and return its span in slots.

    Each slot draws an assumed state from the policy and an actual state
    from the model; on success both backlogs shrink by the assumed state's
    cross-point rates.  The final successful slot is counted fractionally,
    so the span is continuous.

    By default the cross points are fixed at the initial backlog ray, which
    the proportional rates preserve anyway; ``recompute_each_slot`` re-aims
    the ray at the remaining data before every slot instead.

    Raises:
        SimulationGuardError: If the episode is still running after
            ``max_slots`` slots, e.g. when every assumed state with policy
            weight has zero success probability.
    """
    if len(policy.q) != model.n_states:
        raise DomainError(
            f"policy has {len(policy.q)} weights for {model.n_states} states"
        )
    b1 = backlog.b1
    b2 = backlog.b2
    if b1 == 0.0 and b2 == 0.0:
        return 0.0
    success = _success_matrix(model)
    q_cum = np.cumsum(policy.q)
    p_cum = np.cumsum(model.probs)
    static_rates = _state_rates(model, backlog)
    completed = 0
    while completed < max_slots:
        assumed = _draw_index(q_cum, rng)
        actual = _draw_index(p_cum, rng)
        if success[assumed, actual]:
            if recompute_each_slot:
                point = cross_point(model.states[assumed], Backlog(b1, b2))
            else:
                point = static_rates[assumed]
            frac1 = b1 / point.x if b1 > 0.0 else 0.0
            frac2 = b2 / point.y if b2 > 0.0 else 0.0
            frac = max(frac1, frac2)
            # The tolerance absorbs accumulated subtraction dust so an
            # episode that needs an integer number of slots ends on it.
            if frac <= 1.0 + 1e-9:
                return completed + min(frac, 1.0)
            b1 = max(0.0, b1 - point.x)
            b2 = max(0.0, b2 - point.y)
        completed += 1
    raise SimulationGuardError(f"episode still running after {max_slots} slots")


def simulate_spans(
    model: FiniteStateModel,
    backlog: Backlog,
    policy: StatePolicy,
    trials: int,
    rng: np.random.Generator,
    *,
    max_slots: int = 1_000_000,
) -> np.ndarray:
    """Simulate many independent episodes of a degenerate policy at once.

    Under a fixed assumed state every slot is an independent success trial
    delivering fixed cross-point rates, so all trials advance in lock step:
    one vectorized draw per slot for whichever trials are still running.
    Results are identical in distribution to repeated
    :func:`simulate_finite_state` calls but orders of magnitude faster.

    Returns:
        Array of ``trials`` spans in slots.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if not policy.is_degenerate:
        raise DomainError("batch simulation requires a degenerate policy")
    if backlog.is_zero:
        return np.zeros(trials)
    assumed = policy.assumed_index
    p_succ = success_probability(assumed, model)
    point = cross_point(model.states[assumed], backlog)
    frac1 = backlog.b1 / point.x if backlog.b1 > 0.0 else 0.0
    frac2 = backlog.b2 / point.y if backlog.b2 > 0.0 else 0.0
    needed_time = max(frac1, frac2)  # successful slots, possibly fractional
    needed = int(math.ceil(needed_time))
    frac = needed_time - (needed - 1)
    if p_succ == 0.0:
        raise SimulationGuardError(
            f"assumed state {assumed} has zero success probability"
        )
    slots = np.zeros(trials, dtype=np.int64)
    successes = np.zeros(trials, dtype=np.int64)
    alive = np.ones(trials, dtype=bool)
    slot = 0
    while alive.any():
        slot += 1
        if slot > max_slots:
            raise SimulationGuardError(f"episodes still running after {max_slots} slots")
        idx = np.flatnonzero(alive)
        hits = rng.random(idx.size) < p_succ
        slots[idx] += 1
        successes[idx] += hits
        alive[idx[successes[idx] >= needed]] = False
    return slots - 1 + frac
