"""End-to-end release gate.

Each test checks one numbered acceptance criterion at its stated tolerance
and prints a single ``criterion N (...): PASS/FAIL`` line (run with
``pytest -s`` to see them).  The two full-size Monte-Carlo trend checks
(criteria 6 and 7) dominate the suite's runtime at a couple of minutes.
"""

import math
import time
from fractions import Fraction
from itertools import repeat

import numpy as np

from relayspan.cli import main
from relayspan.config import (
    POWER_SWEEP_DEFAULTS,
    RATIO_SWEEP_DEFAULTS,
    experiment_config_from,
)
from relayspan.finite_state import (
    FiniteStateModel,
    RateLevels,
    StatePolicy,
    alpha_coefficients,
    optimal_policy,
    simulate_spans,
)
from relayspan.harness import power_sweep_spans, ratio_sweep_spans, summarize
from relayspan.power import (
    FadingConfig,
    PowerConfig,
    causal_allocate_slot,
    nc_slot_throughput,
    noncausal_min_slots,
    waterfill,
)
from relayspan.rates import Backlog, LinkCapacities, cross_point, forwarding_rates
from relayspan.schedule import closed_form_span, lp_oracle, optimal_schedule, time_span


def _verdict(capsys, number: int, label: str, failures: list) -> None:
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"criterion {number} ({label}): {status}")
    assert not failures, "\n".join(str(f) for f in failures[:20])


def test_criterion_1_schedule_matches_grid_search(capsys):
    failures = []
    rng = np.random.default_rng(90001)
    start = time.perf_counter()
    for k in range(1000):
        c1, c2 = rng.uniform(0.1, 10.0, 2)
        b1, b2 = rng.uniform(0.0, 100.0, 2)
        if b1 == 0.0 and b2 == 0.0:  # degenerate; excluded by construction
            b1 = 1.0
        caps = LinkCapacities(c1, c2)
        backlog = Backlog(b1, b2)
        span = time_span(optimal_schedule(caps, backlog))
        oracle = time_span(lp_oracle(caps, backlog))
        if abs(span - oracle) > 1e-9 * max(abs(oracle), 1e-30):
            failures.append(f"instance {k}: span {span!r} != oracle {oracle!r}")
        rates = forwarding_rates(caps)
        grid = np.linspace(0.0, min(b1, b2) / rates.r_nc, 257)
        th1 = np.maximum(0.0, (b1 - grid * rates.r_nc) / rates.r1)
        th2 = np.maximum(0.0, (b2 - grid * rates.r_nc) / rates.r2)
        best_grid = float(np.min(th1 + th2 + grid))
        if span > best_grid + 1e-9 * max(1.0, best_grid):
            failures.append(f"instance {k}: span {span!r} above grid best {best_grid!r}")
    elapsed = time.perf_counter() - start
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.2f} s exceeds 5 s")
    _verdict(capsys, 1, "minimum-span schedule optimal vs grid search", failures)


def test_criterion_2_closed_form_identity(capsys):
    failures = []
    rng = np.random.default_rng(90002)
    for k in range(1000):
        c1, c2 = rng.uniform(0.1, 10.0, 2)
        b1, b2 = rng.uniform(0.0, 100.0, 2)
        if b1 == 0.0 and b2 == 0.0:
            b2 = 1.0
        caps = LinkCapacities(c1, c2)
        backlog = Backlog(b1, b2)
        direct = max(b1, b2) / c1 + max(b1, b2) / c2 + min(b1, b2) / min(c1, c2)
        closed = closed_form_span(caps, backlog)
        theta_sum = time_span(optimal_schedule(caps, backlog))
        for name, value in (("closed form", closed), ("theta sum", theta_sum)):
            if abs(value - direct) > 1e-12 * max(direct, 1e-30):
                failures.append(f"instance {k}: {name} {value!r} != {direct!r}")
    _verdict(capsys, 2, "closed-form span identity", failures)


def test_criterion_3_finite_state_selection_minimizes_span(capsys):
    failures = []
    start = time.perf_counter()

    # Two levels, uniform PMF, equal backlogs: the alphas are simple
    # rationals and the all-weakest state must win.
    model = FiniteStateModel.from_levels(RateLevels((1.0, 2.0)), [0.25] * 4)
    backlog = Backlog(1.0, 1.0)
    expected = (Fraction(2, 3), Fraction(2, 5), Fraction(2, 5), Fraction(1, 3))
    for i, (got, want) in enumerate(zip(alpha_coefficients(model, backlog).alphas, expected)):
        if abs(got - float(want)) > 1e-12:
            failures.append(f"alpha[{i}] = {got!r}, expected {want}")
    selected = model.states[optimal_policy(model, backlog).assumed_index]
    if selected != LinkCapacities(1.0, 1.0):
        failures.append(f"selected state {selected}, expected (1, 1)")

    # Random models: the argmax state's simulated mean span must be
    # minimal among all degenerate policies within overlapping 95% CIs.
    rng = np.random.default_rng(90003)
    for case in range(20):
        n = int(rng.integers(2, 4))
        levels = RateLevels(tuple(np.cumsum(rng.uniform(0.3, 1.5, n)) + 0.2))
        probs = 0.7 * rng.dirichlet(np.ones(n * n)) + 0.3 / (n * n)
        model = FiniteStateModel.from_levels(levels, probs)
        direction = Backlog(*rng.uniform(0.5, 1.5, 2))
        policy = optimal_policy(model, direction)
        point = cross_point(model.states[policy.assumed_index], direction)
        # Scale the backlog so the selected policy needs ~30 successful
        # slots; keeps every policy's episode length simulation-friendly.
        scale = 30.0 * point.x / direction.b1
        backlog = Backlog(direction.b1 * scale, direction.b2 * scale)
        stats = []
        for j in range(model.n_states):
            sim_rng = np.random.default_rng((90003, case, j))
            spans = simulate_spans(
                model, backlog, StatePolicy.degenerate(model.n_states, j), 10_000, sim_rng
            )
            stats.append((float(spans.mean()), float(spans.std(ddof=1) / math.sqrt(spans.size))))
        sel_mean, sel_se = stats[policy.assumed_index]
        for j, (mean_j, se_j) in enumerate(stats):
            if sel_mean - 1.96 * sel_se > mean_j + 1.96 * se_j:
                failures.append(
                    f"case {case}: state {j} beats the selection "
                    f"({mean_j:.2f} vs {sel_mean:.2f} slots)"
                )
    elapsed = time.perf_counter() - start
    if elapsed >= 120.0:
        failures.append(f"runtime {elapsed:.1f} s exceeds 2 min")
    _verdict(capsys, 3, "finite-state selection minimizes simulated span", failures)


def test_criterion_4_waterfill_kkt_and_dominance(capsys):
    failures = []
    rng = np.random.default_rng(90004)
    for k in range(1000):
        n = int(rng.integers(1, 65))
        gains = 10.0 ** rng.uniform(-2.0, 2.0, n)
        budget = float(10.0 ** rng.uniform(-1.0, 2.0))
        alloc = waterfill(gains, budget)
        p = np.asarray(alloc.powers)
        level = alloc.water_level
        inv = 1.0 / gains
        tol = 1e-8 * max(1.0, level)
        if p.min() < -1e-12:
            failures.append(f"case {k}: negative power {p.min()!r}")
        if abs(p.sum() - budget) > 1e-8 * budget:
            failures.append(f"case {k}: budget residual {p.sum() - budget!r}")
        active = p > 0.0
        if not active.any():
            failures.append(f"case {k}: no active slot")
            continue
        if np.abs(p[active] + inv[active] - level).max() > tol:
            failures.append(f"case {k}: active slots off the water level")
        if (~active).any() and inv[~active].min() < level - tol:
            failures.append(f"case {k}: idle slot below the water level")
        wf = float(np.log2(1.0 + gains * p).sum())
        eq = float(np.log2(1.0 + gains * (budget / n)).sum())
        if wf < eq - 1e-9 * max(1.0, eq):
            failures.append(f"case {k}: throughput {wf!r} below equal split {eq!r}")
    _verdict(capsys, 4, "water filling satisfies KKT and dominates equal split", failures)


def test_criterion_5_causal_equals_noncausal_when_deterministic(capsys):
    failures = []
    rng = np.random.default_rng(90005)
    for k in range(50):
        budget = float(10.0 ** rng.uniform(-0.5, 0.5))
        h_times_budget = float(rng.uniform(5.0, 100.0))
        g_min = h_times_budget / budget
        g_other = g_min * float(rng.uniform(1.0, 3.0))
        g1, g2 = (g_min, g_other) if rng.random() < 0.5 else (g_other, g_min)
        cfg = PowerConfig(budget_w=budget, noise_w=1.0, bandwidth_hz=1.0, slot_duration_s=1.0)
        fading = FadingConfig(g1, g2, deterministic=True)
        ceiling = 2.0 * cfg.bits_per_unit * g_min * budget / math.log(2.0)
        data = float(rng.uniform(0.05, 0.5)) * ceiling
        n_nc, _ = noncausal_min_slots(repeat((g1, g2)), data, cfg)
        remaining = data
        budget_left = budget
        slots = 0
        while remaining > 1e-9 * data:
            decision = causal_allocate_slot((g1, g2), remaining, budget_left, fading, cfg)
            remaining -= nc_slot_throughput(g1, g2, decision.power_w, cfg)
            budget_left -= decision.power_w
            slots += 1
            if slots > 10 * n_nc + 10:
                failures.append(f"case {k}: causal loop ran away past {slots} slots")
                break
        else:
            if slots != n_nc:
                failures.append(f"case {k}: causal used {slots} slots, noncausal {n_nc}")
    _verdict(capsys, 5, "causal equals noncausal on deterministic channels", failures)


def test_criterion_6_span_vs_budget_trends(capsys):
    failures = []
    start = time.perf_counter()
    rows = summarize(power_sweep_spans(experiment_config_from(POWER_SWEEP_DEFAULTS)))
    curves: dict = {}
    for row in rows:
        curves.setdefault((row.strategy, row.knowledge), []).append(row)
    for key, series in curves.items():
        series.sort(key=lambda r: r.sweep_value)
        for lo, hi in zip(series, series[1:]):
            slack = 2.0 * math.hypot(lo.stderr, hi.stderr)
            if hi.mean_span_slots > lo.mean_span_slots + slack:
                failures.append(
                    f"{key}: span rises from {lo.sweep_value:g} to {hi.sweep_value:g} dBm"
                )
    budgets = sorted({row.sweep_value for row in rows})
    for knowledge in ("causal", "noncausal"):
        nc = {r.sweep_value: r for r in curves[("nc_only", knowledge)]}
        od = {r.sweep_value: r for r in curves[("one_directional", knowledge)]}
        for b in budgets:
            slack = 2.0 * math.hypot(nc[b].stderr, od[b].stderr)
            if nc[b].mean_span_slots > od[b].mean_span_slots + slack:
                failures.append(
                    f"coding above one-directional at {b:g} dBm ({knowledge})"
                )
    nc_causal = {r.sweep_value: r for r in curves[("nc_only", "causal")]}
    nc_clair = {r.sweep_value: r for r in curves[("nc_only", "noncausal")]}
    lo_b, hi_b = budgets[0], budgets[-1]
    gap_low = nc_causal[lo_b].mean_span_slots - nc_clair[lo_b].mean_span_slots
    gap_high = nc_causal[hi_b].mean_span_slots - nc_clair[hi_b].mean_span_slots
    four = (nc_causal[lo_b], nc_clair[lo_b], nc_causal[hi_b], nc_clair[hi_b])
    slack = 2.0 * math.sqrt(sum(r.stderr**2 for r in four))
    if not gap_high < gap_low + slack:
        failures.append(
            f"causal-noncausal gap did not shrink with budget: "
            f"{gap_high!r} at {hi_b:g} dBm vs {gap_low!r} at {lo_b:g} dBm"
        )
    elapsed = time.perf_counter() - start
    if elapsed >= 600.0:
        failures.append(f"runtime {elapsed:.0f} s exceeds 10 min")
    _verdict(capsys, 6, "span vs budget trends", failures)


def test_criterion_7_span_vs_ratio_ordering(capsys):
    failures = []
    rows = summarize(ratio_sweep_spans(experiment_config_from(RATIO_SWEEP_DEFAULTS)))
    by_ratio: dict = {}
    for row in rows:
        by_ratio.setdefault(row.sweep_value, {})[row.strategy] = row
    for ratio in sorted(by_ratio):
        group = by_ratio[ratio]
        ncf = group["nc_first"]
        opp = group["opportunistic"]
        od = group["one_directional"]
        if ratio == 0.0:
            # One buffer empty: every strategy degenerates to forwarding.
            for a, b in ((ncf, opp), (opp, od), (ncf, od)):
                slack = 2.0 * math.hypot(a.stderr, b.stderr)
                if abs(a.mean_span_slots - b.mean_span_slots) > slack:
                    failures.append(f"{a.strategy} differs from {b.strategy} at ratio 0")
        else:
            for a, b in ((ncf, opp), (opp, od)):
                slack = 2.0 * math.hypot(a.stderr, b.stderr)
                if a.mean_span_slots > b.mean_span_slots + slack:
                    failures.append(f"{a.strategy} above {b.strategy} at ratio {ratio:g}")
    _verdict(capsys, 7, "span vs split-ratio ordering", failures)


POWER_CFG = """\
trials = 2
budgets_dbm = -6, -5
strategies = nc_only
knowledges = causal
b1_mbytes = 0.25
b2_mbytes = 0.25
"""

RATIO_CFG = """\
trials = 2
ratios = 0, 1
strategies = nc_first
knowledges = causal
total_mbytes = 0.5
"""

TRACE_CFG = """\
b1_mbytes = 0.02
b2_mbytes = 0.02
"""


def test_criterion_8_seeded_reruns_byte_identical(capsys, tmp_path):
    failures = []
    cases = (
        ("power-sweep", POWER_CFG),
        ("ratio-sweep", RATIO_CFG),
        ("waterfill-trace", TRACE_CFG),
    )
    for command, text in cases:
        cfg_path = tmp_path / f"{command}.cfg"
        cfg_path.write_text(text)
        outputs = []
        for run in ("first", "second"):
            out = tmp_path / f"{command}-{run}.csv"
            code = main([command, "--config", str(cfg_path), "--seed", "3", "--out", str(out)])
            if code != 0:
                failures.append(f"{command}: exit code {code}")
            outputs.append(out.read_bytes())
        if outputs[0] != outputs[1]:
            failures.append(f"{command}: repeated seeded runs differ")
    _verdict(capsys, 8, "seeded reruns produce identical CSV bytes", failures)
