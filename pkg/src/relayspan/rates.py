"""Achievable per-slot rates in a two-way relay network.

Two sources exchange data through a single relay; no direct link exists
between them.  Link ``i`` connects source ``i`` to the relay and sustains
capacity ``ci`` in either direction, one transmission at a time.  The relay
can serve the two opposing flows separately (pure forwarding) or combine
one packet from each side into a single coded broadcast that both sources
decode, which saves one downlink transmission per exchanged pair.

Rates live in the plane whose ``x`` axis measures delivery toward source 2
(draining source 1's backlog) and whose ``y`` axis measures delivery toward
source 1.  The outer boundary of the achievable region is the polyline
``a - b - c`` returned by :func:`region_vertices`, with ``b`` the corner
reached by always coding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateBacklogError, DomainError

__all__ = [
    "LinkCapacities",
    "Backlog",
    "RateTriple",
    "RatePoint",
    "forwarding_rates",
    "region_vertices",
    "cross_point",
]


@dataclass(frozen=True)
class LinkCapacities:
    """Per-slot capacities of the two source-relay links.

    Attributes:
        c1: Capacity of the link between source 1 and the relay.
        c2: Capacity of the link between source 2 and the relay.
    """

    c1: float
    c2: float

    def __post_init__(self) -> None:
        for name, value in (("c1", self.c1), ("c2", self.c2)):
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be finite and positive, got {value!r}")

    @property
    def weaker(self) -> float:
        """Capacity of the bottleneck link."""
        return min(self.c1, self.c2)


@dataclass(frozen=True)
class Backlog:
    """Amounts of data waiting at the two sources.

    Attributes:
        b1: Data queued at source 1, destined for source 2.
        b2: Data queued at source 2, destined for source 1.
    """

    b1: float
    b2: float

    def __post_init__(self) -> None:
        for name, value in (("b1", self.b1), ("b2", self.b2)):
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")

    @property
    def is_zero(self) -> bool:
        return self.b1 == 0.0 and self.b2 == 0.0


@dataclass(frozen=True)
class RateTriple:
    """Extreme service rates of the two relaying patterns.

    Attributes:
        r1: Rate of the flow from source 1 under pure one-directional
            forwarding dedicated to that flow.
        r2: Same for the flow from source 2; equals ``r1`` because both
            flows traverse the same two links.
        r_nc: Common rate of both flows when every relay transmission is a
            coded broadcast serving the two flows at once.
    """

    r1: float
    r2: float
    r_nc: float


@dataclass(frozen=True)
class RatePoint:
    """A point of the achievable rate region.

    Attributes:
        x: Delivery rate toward source 2 (drains source 1's backlog).
        y: Delivery rate toward source 1 (drains source 2's backlog).
    """

    x: float
    y: float


def forwarding_rates(caps: LinkCapacities) -> RateTriple:
    """Return the extreme service rates for the given link capacities.

    A unit of flow 1 occupies link 1 for ``1/c1`` slots (uplink) and link 2
    for ``1/c2`` slots (downlink), so a relay dedicated to one flow sustains
    ``(1/c1 + 1/c2)^-1`` units per slot; flow 2 is symmetric.  A coded
    exchange of one unit in each direction costs both uplinks plus a single
    broadcast paced by the weaker link.

    Args:
        caps: Link capacities.

    Returns:
        The rates ``(r1, r2, r_nc)`` with ``r1 == r2`` exactly.
    """
    inv1 = 1.0 / caps.c1
    inv2 = 1.0 / caps.c2
    one_way = 1.0 / (inv1 + inv2)
    coded = 1.0 / (inv1 + inv2 + 1.0 / caps.weaker)
    return RateTriple(r1=one_way, r2=one_way, r_nc=coded)


def region_vertices(caps: LinkCapacities) -> tuple[RatePoint, RatePoint, RatePoint]:
    """Return the corner points ``(a, b, c)`` of the achievable rate region.

    ``a = (0, r2)`` serves flow 2 only, ``c = (r1, 0)`` serves flow 1 only,
    and ``b = (r_nc, r_nc)`` is the coded corner.  The outer boundary is the
    segment ``a-b`` followed by ``b-c``; ``b`` lies strictly outside the
    chord ``a-c``, which is why coding helps.
    """
    rates = forwarding_rates(caps)
    a = RatePoint(0.0, rates.r2)
    b = RatePoint(rates.r_nc, rates.r_nc)
    c = RatePoint(rates.r1, 0.0)
    return a, b, c


def cross_point(caps: LinkCapacities, backlog: Backlog) -> RatePoint:
    """Intersect the backlog ray with the rate region boundary.

    Serving both queues in proportion to their sizes empties them at the
    same time, so the best proportional operating point is where the ray
    from the origin through ``(b1, b2)`` meets the outer boundary of the
    rate region.

    Args:
        caps: Link capacities.
        backlog: Queue sizes defining the ray direction; at least one must
            be positive.

    Returns:
        The boundary point with ``y / x == b2 / b1`` (an axis vertex when
        one backlog is zero).

    Raises:
        DegenerateBacklogError: If both backlogs are zero.
    """
    if backlog.is_zero:
        raise DegenerateBacklogError("cross point undefined for an empty backlog pair")
    a, b, c = region_vertices(caps)
    if backlog.b1 == 0.0:
        return a
    if backlog.b2 == 0.0:
        return c
    if backlog.b1 == backlog.b2:
        return b
    rates = forwarding_rates(caps)
    if backlog.b2 > backlog.b1:
        # Steep ray: meets the segment from a = (0, r2) to b = (r_nc, r_nc).
        t = rates.r2 * rates.r_nc / (
            rates.r_nc * backlog.b2 + (rates.r2 - rates.r_nc) * backlog.b1
        )
    else:
        # Shallow ray: meets the segment from b = (r_nc, r_nc) to c = (r1, 0).
        t = rates.r1 * rates.r_nc / (
            rates.r_nc * backlog.b1 + (rates.r1 - rates.r_nc) * backlog.b2
        )
    return RatePoint(t * backlog.b1, t * backlog.b2)
