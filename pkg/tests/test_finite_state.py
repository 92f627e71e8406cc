"""Finite-state channels: state enumeration, alpha coefficients, simulation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from relayspan import (
    Backlog,
    DegenerateBacklogError,
    DomainError,
    FiniteStateModel,
    LinkCapacities,
    RateLevels,
    SimulationGuardError,
    StatePolicy,
    alpha_coefficients,
    cross_point,
    enumerate_states,
    expected_rate,
    optimal_policy,
    simulate_finite_state,
    simulate_spans,
    success_probability,
    success_set,
)

UNIFORM = FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), [0.25] * 4)
EQUAL_BACKLOG = Backlog(1.0, 1.0)


def test_enumerate_states_order():
    states = enumerate_states(RateLevels((1.0, 2.0)))
    assert [(s.c1, s.c2) for s in states] == [
        (1.0, 1.0),
        (1.0, 2.0),
        (2.0, 1.0),
        (2.0, 2.0),
    ]


def test_levels_validation():
    with pytest.raises(DomainError):
        RateLevels(())
    with pytest.raises(DomainError):
        RateLevels((1.0, 1.0))
    with pytest.raises(DomainError):
        RateLevels((2.0, 1.0))
    with pytest.raises(DomainError):
        RateLevels((0.0, 1.0))


def test_model_validation():
    states = enumerate_states(RateLevels((1.0, 2.0)))
    with pytest.raises(DomainError):
        FiniteStateModel(states, (0.5, 0.5))  # wrong length
    with pytest.raises(DomainError):
        FiniteStateModel(states, (0.5, 0.5, 0.5, 0.5))  # sums to 2
    with pytest.raises(DomainError):
        FiniteStateModel(states, (0.5, 0.6, -0.1, 0.0))


def test_success_sets_uniform_model():
    assert success_set(0, UNIFORM) == (0, 1, 2, 3)
    assert success_set(1, UNIFORM) == (1, 3)
    assert success_set(2, UNIFORM) == (2, 3)
    assert success_set(3, UNIFORM) == (3,)
    with pytest.raises(DomainError):
        success_set(4, UNIFORM)


def test_success_probability_uniform():
    assert success_probability(0, UNIFORM) == 1.0
    assert success_probability(1, UNIFORM) == 0.5
    assert success_probability(3, UNIFORM) == 0.25


def test_success_set_contains_self_and_shrinks_upward():
    rng = np.random.default_rng(301)
    for _ in range(50):
        n = int(rng.integers(2, 4))
        levels = RateLevels(tuple(np.sort(rng.uniform(0.5, 5.0, n) + np.arange(n))))
        probs = rng.dirichlet(np.ones(n * n))
        model = FiniteStateModel.from_levels(levels, probs / probs.sum())
        for i in range(model.n_states):
            members = success_set(i, model)
            assert i in members
            # Dominating states succeed whenever their dominated ones do.
            for k in members:
                assert set(success_set(k, model)) <= set(members)


def _rational_alphas(levels, probs, b1, b2):
    """Independent alpha oracle in exact rational arithmetic."""
    levels = [Fraction(v) for v in levels]
    b1, b2 = Fraction(b1), Fraction(b2)
    states = [(x, y) for x in levels for y in levels]
    out = []
    for i, (c1, c2) in enumerate(states):
        p_succ = sum(
            Fraction(p)
            for (a1, a2), p in zip(states, probs)
            if c1 <= a1 and c2 <= a2
        )
        r1 = 1 / (1 / c1 + 1 / c2)
        r_nc = 1 / (1 / c1 + 1 / c2 + 1 / min(c1, c2))
        # Cross point of the ray through (b1, b2) with the boundary a-b-c.
        if b1 == b2:
            x, y = r_nc, r_nc
        elif b2 > b1:
            t = r1 * r_nc / (r_nc * b2 + (r1 - r_nc) * b1)
            x, y = t * b1, t * b2
        else:
            t = r1 * r_nc / (r_nc * b1 + (r1 - r_nc) * b2)
            x, y = t * b1, t * b2
        out.append(p_succ * (x + y))
    return out


def test_alpha_example_exact():
    alphas = alpha_coefficients(UNIFORM, EQUAL_BACKLOG).alphas
    expected = (Fraction(2, 3), Fraction(2, 5), Fraction(2, 5), Fraction(1, 3))
    for got, want in zip(alphas, expected):
        assert got == pytest.approx(float(want), abs=1e-12)


def test_alpha_random_matches_rational_oracle():
    rng = np.random.default_rng(302)
    for _ in range(50):
        n = int(rng.integers(2, 4))
        levels = [int(v) for v in np.sort(rng.choice(np.arange(1, 20), n, replace=False))]
        weights = rng.integers(1, 9, n * n)
        probs = [Fraction(int(w), int(weights.sum())) for w in weights]
        b1, b2 = (int(v) for v in rng.integers(1, 30, 2))
        model = FiniteStateModel.from_levels(
            RateLevels(tuple(float(v) for v in levels)),
            [float(p) for p in probs],
        )
        got = alpha_coefficients(model, Backlog(float(b1), float(b2))).alphas
        want = _rational_alphas(levels, probs, b1, b2)
        for g, w in zip(got, want):
            assert g == pytest.approx(float(w), rel=1e-12)


def test_alpha_needs_nonzero_backlog():
    with pytest.raises(DegenerateBacklogError):
        alpha_coefficients(UNIFORM, Backlog(0.0, 0.0))


def test_optimal_policy_example():
    policy = optimal_policy(UNIFORM, EQUAL_BACKLOG)
    assert policy.is_degenerate
    assert policy.assumed_index == 0
    assert UNIFORM.states[policy.assumed_index] == LinkCapacities(1.0, 1.0)


def test_optimal_policy_tie_takes_lowest_index():
    # Two states tie when one never adds success probability: make state
    # (1,2) and (2,1) symmetric; the earlier one wins.
    policy = optimal_policy(
        FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), [0.0, 0.5, 0.5, 0.0]),
        EQUAL_BACKLOG,
    )
    alphas = alpha_coefficients(
        FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), [0.0, 0.5, 0.5, 0.0]),
        EQUAL_BACKLOG,
    ).alphas
    assert alphas[1] == alphas[2]
    assert policy.assumed_index in (0, 1)
    assert policy.assumed_index == alphas.index(max(alphas))


def test_policy_validation():
    with pytest.raises(DomainError):
        StatePolicy((0.5, 0.6))
    with pytest.raises(DomainError):
        StatePolicy.degenerate(4, 4)
    mixed = StatePolicy((0.5, 0.5, 0.0, 0.0))
    assert not mixed.is_degenerate
    with pytest.raises(DomainError):
        mixed.assumed_index


def test_expected_rate_uniform_optimal():
    policy = StatePolicy.degenerate(4, 0)
    e1, e2 = expected_rate(UNIFORM, policy, EQUAL_BACKLOG)
    assert e1 == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert e2 == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_expected_rate_mixed_policy():
    policy = StatePolicy((0.5, 0.0, 0.0, 0.5))
    e1, e2 = expected_rate(UNIFORM, policy, EQUAL_BACKLOG)
    # Half weight on (1,1): p=1, rates (1/3, 1/3); half on (2,2): p=1/4,
    # rates (2/3, 2/3).
    assert e1 == pytest.approx(0.5 / 3.0 + 0.5 * 0.25 * 2.0 / 3.0, rel=1e-12)
    assert e2 == pytest.approx(e1, rel=1e-12)


def test_expected_rate_stays_on_backlog_ray():
    rng = np.random.default_rng(303)
    for _ in range(100):
        probs = rng.dirichlet(np.ones(4))
        model = FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), probs)
        b1, b2 = rng.uniform(0.5, 20.0, 2)
        q = rng.dirichlet(np.ones(4))
        e1, e2 = expected_rate(model, StatePolicy(tuple(q)), Backlog(b1, b2))
        if e1 > 0.0:
            assert e2 / e1 == pytest.approx(b2 / b1, rel=1e-9)


def test_single_state_episode_is_deterministic():
    model = FiniteStateModel.from_levels(RateLevels((1.0,)), [1.0])
    policy = StatePolicy.degenerate(1, 0)
    backlog = Backlog(2.0, 1.0)
    rng = np.random.default_rng(304)
    # Cross point of (1,1) on the (2,1) ray is (0.4, 0.2): five full slots.
    assert simulate_finite_state(model, backlog, policy, rng) == 5.0
    spans = simulate_spans(model, backlog, policy, 5, np.random.default_rng(305))
    assert np.array_equal(spans, np.full(5, 5.0))


def test_always_successful_policy_integer_span():
    # Assumed (1,1) under the uniform model succeeds every slot; with b =
    # (1, 1) the rates are (1/3, 1/3), so every episode takes exactly 3 slots.
    policy = StatePolicy.degenerate(4, 0)
    spans = simulate_spans(UNIFORM, EQUAL_BACKLOG, policy, 20, np.random.default_rng(306))
    assert np.array_equal(spans, np.full(20, 3.0))
    one = simulate_finite_state(UNIFORM, EQUAL_BACKLOG, policy, np.random.default_rng(307))
    assert one == 3.0


def test_risky_state_mean_span():
    """Assuming (2,2) succeeds 1/4 of the time at rates (2/3, 2/3): two
    successes finish, the second counted half, so the mean span is
    2/0.25 - 1 + 0.5 = 7.5."""
    policy = StatePolicy.degenerate(4, 3)
    spans = simulate_spans(UNIFORM, EQUAL_BACKLOG, policy, 4000, np.random.default_rng(308))
    se = spans.std(ddof=1) / math.sqrt(spans.size)
    assert spans.mean() == pytest.approx(7.5, abs=4 * se)
    assert spans.min() >= 1.5


def test_batch_and_single_simulators_agree():
    policy = StatePolicy.degenerate(4, 1)  # p = 1/2, rates (0.4, 0.4)
    batch = simulate_spans(UNIFORM, EQUAL_BACKLOG, policy, 3000, np.random.default_rng(309))
    singles = np.array(
        [
            simulate_finite_state(UNIFORM, EQUAL_BACKLOG, policy, np.random.default_rng(400 + t))
            for t in range(600)
        ]
    )
    se = math.hypot(
        batch.std(ddof=1) / math.sqrt(batch.size),
        singles.std(ddof=1) / math.sqrt(singles.size),
    )
    assert batch.mean() == pytest.approx(singles.mean(), abs=4 * se)
    # Exact mean: 3 successes at p = 1/2, final slot counted half.
    assert batch.mean() == pytest.approx(5.5, abs=0.3)


def test_long_run_delivery_matches_alpha():
    # Over a long episode the delivered data per slot converges to the
    # selected state's alpha coefficient.
    model = FiniteStateModel.from_levels(
        RateLevels((1.0, 3.0)), [0.15, 0.35, 0.2, 0.3]
    )
    backlog = Backlog(30.0, 20.0)
    policy = optimal_policy(model, backlog)
    alpha = alpha_coefficients(model, backlog).alphas[policy.assumed_index]
    point = cross_point(model.states[policy.assumed_index], backlog)
    scale = 200.0 / max(backlog.b1 / point.x, backlog.b2 / point.y)
    big = Backlog(backlog.b1 * scale, backlog.b2 * scale)
    spans = simulate_spans(model, big, policy, 1500, np.random.default_rng(310))
    delivered_rate = (big.b1 + big.b2) / spans.mean()
    assert abs(delivered_rate - alpha) / alpha < 0.02


def test_zero_success_state_guards():
    model = FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), [1.0, 0.0, 0.0, 0.0])
    policy = StatePolicy.degenerate(4, 3)
    with pytest.raises(SimulationGuardError):
        simulate_spans(model, EQUAL_BACKLOG, policy, 10, np.random.default_rng(311))
    with pytest.raises(SimulationGuardError):
        simulate_finite_state(
            model, EQUAL_BACKLOG, policy, np.random.default_rng(312), max_slots=200
        )


def test_batch_requires_degenerate_policy():
    with pytest.raises(DomainError):
        simulate_spans(
            UNIFORM, EQUAL_BACKLOG, StatePolicy((0.5, 0.5, 0.0, 0.0)), 10,
            np.random.default_rng(313),
        )


def test_recompute_each_slot_matches_static_rates():
    # Cross-point service drains both queues proportionally, so re-aiming
    # the ray at the remaining data changes nothing beyond float dust.
    policy = StatePolicy.degenerate(4, 1)
    backlog = Backlog(2.0, 1.0)
    static = simulate_finite_state(UNIFORM, backlog, policy, np.random.default_rng(314))
    moving = simulate_finite_state(
        UNIFORM, backlog, policy, np.random.default_rng(314), recompute_each_slot=True
    )
    assert moving == pytest.approx(static, rel=1e-9)


def test_zero_backlog_spans():
    policy = StatePolicy.degenerate(4, 0)
    assert simulate_finite_state(UNIFORM, Backlog(0.0, 0.0), policy, np.random.default_rng(315)) == 0.0
    assert np.array_equal(
        simulate_spans(UNIFORM, Backlog(0.0, 0.0), policy, 3, np.random.default_rng(316)),
        np.zeros(3),
    )
