"""Minimum-time-span schedules for time-invariant channels.

A schedule splits continuous time between three phases: one-directional
forwarding for flow 1 (``theta1``), one-directional forwarding for flow 2
(``theta2``), and coded exchange (``theta3``).  Feasibility requires

    theta1 * r1 + theta3 * r_nc == b1
    theta2 * r2 + theta3 * r_nc == b2

and the span ``theta1 + theta2 + theta3`` is to be minimized.  Substituting
the equalities makes the span affine in ``theta3`` with slope
``1 - r_nc * (1/r1 + 1/r2) < 0``, so the optimum always pushes ``theta3``
to its cap ``min(b1, b2) / r_nc``: code as much as the smaller backlog
allows, then flush the remainder one-directionally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .rates import Backlog, LinkCapacities, forwarding_rates

__all__ = [
    "Schedule",
    "optimal_schedule",
    "time_span",
    "closed_form_span",
    "schedule_for_theta3",
    "lp_oracle",
]


@dataclass(frozen=True)
class Schedule:
    """Time allocations of the three transmission phases, in slots.

    Attributes:
        theta1: Time spent forwarding flow 1 (source 1 to source 2).
        theta2: Time spent forwarding flow 2.
        theta3: Time spent on coded exchange serving both flows.
    """

    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self) -> None:
        for name, value in (
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("theta3", self.theta3),
        ):
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")


def time_span(schedule: Schedule) -> float:
    """Total duration of a schedule."""
    return schedule.theta1 + schedule.theta2 + schedule.theta3


def optimal_schedule(caps: LinkCapacities, backlog: Backlog) -> Schedule:
    """Return the minimum-span schedule.

    Coded exchange runs for as long as the smaller backlog sustains it,
    ``min(b1, b2) / r_nc``; the leftover of the larger backlog is flushed
    by that flow's one-directional phase.  At most one of ``theta1`` and
    ``theta2`` is positive (neither is when ``b1 == b2``).
    """
    rates = forwarding_rates(caps)
    smaller = min(backlog.b1, backlog.b2)
    theta3 = smaller / rates.r_nc
    theta1 = (backlog.b1 - smaller) / rates.r1
    theta2 = (backlog.b2 - smaller) / rates.r2
    return Schedule(theta1=theta1, theta2=theta2, theta3=theta3)


def closed_form_span(caps: LinkCapacities, backlog: Backlog) -> float:
    """Return the minimum span without constructing the schedule.

    Expanding the optimal schedule gives
    ``max(b)/c1 + max(b)/c2 + min(b)/min(c1, c2)``: the larger backlog
    crosses both links in full, and the coded broadcast of the smaller
    backlog is paced by the weaker link.
    """
    larger = max(backlog.b1, backlog.b2)
    smaller = min(backlog.b1, backlog.b2)
    return larger / caps.c1 + larger / caps.c2 + smaller / caps.weaker


def schedule_for_theta3(caps: LinkCapacities, backlog: Backlog, theta3: float) -> Schedule:
    """Build the unique feasible schedule with the given coding time.

    The two forwarding times are pinned by the delivery equalities once
    ``theta3`` is chosen; tiny negative values from float rounding are
    clipped to zero.

    Raises:
        DomainError: If ``theta3`` lies outside ``[0, min(b1,b2)/r_nc]``.
    """
    rates = forwarding_rates(caps)
    cap = min(backlog.b1, backlog.b2) / rates.r_nc
    if not 0.0 <= theta3 <= cap * (1.0 + 1e-12) + 1e-300:
        raise DomainError(f"theta3 {theta3!r} outside the feasible interval [0, {cap!r}]")
    theta1 = max(0.0, (backlog.b1 - theta3 * rates.r_nc) / rates.r1)
    theta2 = max(0.0, (backlog.b2 - theta3 * rates.r_nc) / rates.r2)
    return Schedule(theta1=theta1, theta2=theta2, theta3=min(theta3, cap))


def lp_oracle(caps: LinkCapacities, backlog: Backlog, grid_points: int = 1001) -> Schedule:
    """Solve the span minimization by direct search over its one free variable.

    The delivery equalities leave ``theta3`` as the only degree of freedom,
    and the span is affine in it, so the minimum sits at an endpoint of
    ``[0, min(b1,b2)/r_nc]``.  Both endpoints plus a uniform grid are
    evaluated anyway as a robustness check, and the overall minimizer is
    returned.  This deliberately shares no code with
    :func:`optimal_schedule` so the two can cross-validate each other.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be at least 2")
    rates = forwarding_rates(caps)
    cap = min(backlog.b1, backlog.b2) / rates.r_nc
    candidates = np.concatenate(([0.0, cap], np.linspace(0.0, cap, grid_points)))
    theta1 = np.maximum(0.0, (backlog.b1 - candidates * rates.r_nc) / rates.r1)
    theta2 = np.maximum(0.0, (backlog.b2 - candidates * rates.r_nc) / rates.r2)
    spans = theta1 + theta2 + candidates
    best = int(np.argmin(spans))
    return schedule_for_theta3(caps, backlog, float(candidates[best]))
