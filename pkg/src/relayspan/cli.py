"""Command-line front end.

Subcommands::

    schedule         closed-form minimum-span schedule, fixed capacities
    finite-state     alpha coefficients and the optimal assumed state
    power-sweep      average span versus power budget (CSV)
    ratio-sweep      average span versus data ratio (CSV)
    waterfill-trace  per-slot trace of one seeded relay episode (CSV)

Commands that take ``--config`` read the flat key=value format documented
in :mod:`relayspan.config`; command-line flags override file values, and
file values override the command's defaults.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Mapping

import numpy as np

from .config import (
    FINITE_STATE_DEFAULTS,
    POWER_SWEEP_DEFAULTS,
    RATIO_SWEEP_DEFAULTS,
    TRACE_DEFAULTS,
    describe_keys,
    experiment_config_from,
    fading_config_from,
    parse_config,
    power_config_from,
)
from .errors import ConfigError, RelaySpanError
from .finite_state import (
    FiniteStateModel,
    RateLevels,
    alpha_coefficients,
    optimal_policy,
    simulate_spans,
)
from .harness import (
    SummaryRow,
    dbm_to_watts,
    mbytes_to_bits,
    power_sweep,
    ratio_sweep,
    write_summary_csv,
)
from .rates import Backlog, LinkCapacities
from .relay import Knowledge, RelayBuffers, SlotRecord, Strategy, run_relay, write_trace_csv
from .schedule import optimal_schedule, time_span

__all__ = ["main", "build_parser"]


def _merged(defaults: Mapping[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    mapping = dict(defaults)
    if getattr(args, "config", None):
        mapping.update(parse_config(args.config))
    return mapping


def _enum(cls: type, value: str, what: str) -> Any:
    try:
        return cls(value)
    except ValueError:
        options = ", ".join(m.value for m in cls)  # type: ignore[attr-defined]
        raise ConfigError(f"unknown {what} {value!r}; choose from: {options}") from None


def cmd_schedule(args: argparse.Namespace) -> None:
    caps = LinkCapacities(c1=args.c1, c2=args.c2)
    backlog = Backlog(b1=args.b1, b2=args.b2)
    sched = optimal_schedule(caps, backlog)
    print(f"theta1 = {sched.theta1!r}")
    print(f"theta2 = {sched.theta2!r}")
    print(f"theta3 = {sched.theta3!r}")
    print(f"span = {time_span(sched)!r}")


def cmd_finite_state(args: argparse.Namespace) -> None:
    mapping = _merged(FINITE_STATE_DEFAULTS, args)
    if args.seed is not None:
        mapping["seed"] = args.seed
    if args.trials is not None:
        mapping["simulate_trials"] = args.trials
    levels = RateLevels(tuple(mapping["levels"]))
    model = FiniteStateModel.from_levels(levels, mapping["probs"])
    backlog = Backlog(b1=float(mapping["b1"]), b2=float(mapping["b2"]))
    alphas = alpha_coefficients(model, backlog).alphas
    policy = optimal_policy(model, backlog)
    index = policy.assumed_index

    lines = []
    for i, caps in enumerate(model.states):
        lines.append(f"state ({caps.c1:g}, {caps.c2:g}): alpha = {alphas[i]!r}")
    selected = model.states[index]
    lines.append(f"selected state: ({selected.c1:g}, {selected.c2:g}) [index {index}]")

    trials = int(mapping["simulate_trials"])
    if trials > 0:
        rng = np.random.default_rng(int(mapping["seed"]))
        spans = simulate_spans(
            model, backlog, policy, trials, rng, max_slots=int(mapping["max_slots"])
        )
        mean = float(np.mean(spans))
        stderr = float(np.std(spans, ddof=1) / np.sqrt(trials)) if trials >= 2 else 0.0
        lines.append(f"simulated mean span = {mean!r} +/- {stderr!r} ({trials} trials)")

    report = "\n".join(lines)
    print(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report + "\n")


def _print_summary_table(rows: list[SummaryRow]) -> None:
    print(f"{'sweep_value':>12}  {'strategy':<16}{'knowledge':<11}"
          f"{'mean_span_slots':>16}  {'stderr':>10}  {'trials':>6}")
    for r in rows:
        print(f"{r.sweep_value:>12g}  {r.strategy:<16}{r.knowledge:<11}"
              f"{r.mean_span_slots:>16.4f}  {r.stderr:>10.4f}  {r.trials:>6}")


def cmd_power_sweep(args: argparse.Namespace) -> None:
    mapping = _merged(POWER_SWEEP_DEFAULTS, args)
    if args.seed is not None:
        mapping["master_seed"] = args.seed
    if args.trials is not None:
        mapping["trials"] = args.trials
    rows = power_sweep(experiment_config_from(mapping))
    write_summary_csv(rows, args.out)
    _print_summary_table(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_ratio_sweep(args: argparse.Namespace) -> None:
    mapping = _merged(RATIO_SWEEP_DEFAULTS, args)
    if args.seed is not None:
        mapping["master_seed"] = args.seed
    if args.trials is not None:
        mapping["trials"] = args.trials
    rows = ratio_sweep(experiment_config_from(mapping))
    write_summary_csv(rows, args.out)
    _print_summary_table(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_waterfill_trace(args: argparse.Namespace) -> None:
    mapping = _merged(TRACE_DEFAULTS, args)
    if args.seed is not None:
        mapping["seed"] = args.seed
    strategy = _enum(Strategy, str(mapping["strategy"]), "strategy")
    knowledge = _enum(Knowledge, str(mapping["knowledge"]), "knowledge")
    power = power_config_from(mapping, dbm_to_watts(float(mapping["budget_dbm"])))
    fading = fading_config_from(mapping)
    buffers = RelayBuffers(
        toward_2=mbytes_to_bits(float(mapping["b1_mbytes"])),
        toward_1=mbytes_to_bits(float(mapping["b2_mbytes"])),
    )
    rng = np.random.default_rng(int(mapping["seed"]))
    records: list[SlotRecord] = []
    span = run_relay(
        strategy, buffers, fading, power, knowledge, rng,
        max_slots=int(mapping["max_slots"]), trace=records,
    )
    write_trace_csv(records, args.out)
    print(f"span = {span!r} slots")
    print(f"wrote {len(records)} slot rows to {args.out}")


def _add_config_flags(sp: argparse.ArgumentParser, *, out_required: bool) -> None:
    sp.add_argument("--config", metavar="PATH", help="key=value config file")
    sp.add_argument("--seed", type=int, metavar="N", help="override the seed")
    sp.add_argument("--trials", type=int, metavar="N", help="override the trial count")
    sp.add_argument(
        "--out", metavar="PATH", required=out_required,
        help="output file path" + ("" if out_required else " (optional)"),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relayspan",
        description="Minimum-time-span scheduling and simulation for "
                    "network-coded two-way relay networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser(
        "schedule",
        help="closed-form minimum-span schedule for fixed link capacities",
    )
    sp.add_argument("--c1", type=float, required=True, help="link 1 capacity, data units per slot")
    sp.add_argument("--c2", type=float, required=True, help="link 2 capacity, data units per slot")
    sp.add_argument("--b1", type=float, required=True, help="source 1 backlog, data units")
    sp.add_argument("--b2", type=float, required=True, help="source 2 backlog, data units")
    sp.set_defaults(func=cmd_schedule)

    epilog = "config keys:\n" + describe_keys()
    kwargs: dict[str, Any] = {
        "epilog": epilog,
        "formatter_class": argparse.RawDescriptionHelpFormatter,
    }

    fs = sub.add_parser(
        "finite-state",
        help="alpha coefficients and the optimal assumed state",
        **kwargs,
    )
    _add_config_flags(fs, out_required=False)
    fs.set_defaults(func=cmd_finite_state)

    ps = sub.add_parser(
        "power-sweep",
        help="average span versus power budget, written as CSV",
        **kwargs,
    )
    _add_config_flags(ps, out_required=True)
    ps.set_defaults(func=cmd_power_sweep)

    rs = sub.add_parser(
        "ratio-sweep",
        help="average span versus data ratio, written as CSV",
        **kwargs,
    )
    _add_config_flags(rs, out_required=True)
    rs.set_defaults(func=cmd_ratio_sweep)

    wt = sub.add_parser(
        "waterfill-trace",
        help="per-slot trace of one seeded relay episode, written as CSV",
        **kwargs,
    )
    _add_config_flags(wt, out_required=True)
    wt.set_defaults(func=cmd_waterfill_trace)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except RelaySpanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
