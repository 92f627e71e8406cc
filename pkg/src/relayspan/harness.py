"""Monte-Carlo experiment driver for the relay strategy comparisons.

Two sweeps are provided: average span versus power budget at fixed equal
backlogs, and average span versus the data ratio ``b1/b2`` at fixed total
data.  Every (sweep point, strategy, knowledge) combination runs the same
set of trials, and the trial at index ``t`` of point ``p`` always derives
its generator from ``(master_seed, p, t)`` regardless of strategy, so
strategies are compared on identical channel realizations and results do
not depend on execution order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError
from .power import FadingConfig, PowerConfig
from .relay import Knowledge, RelayBuffers, Strategy, run_relay

__all__ = [
    "ExperimentConfig",
    "PointSpans",
    "SummaryRow",
    "dbm_to_watts",
    "mbytes_to_bits",
    "trial_rng",
    "power_sweep_spans",
    "ratio_sweep_spans",
    "power_sweep",
    "ratio_sweep",
    "summarize",
    "write_summary_csv",
    "SUMMARY_CSV_HEADER",
]

SUMMARY_CSV_HEADER = "sweep_value,strategy,knowledge,mean_span_slots,stderr,trials"


def dbm_to_watts(dbm: float) -> float:
    """Convert a power level from dBm to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def mbytes_to_bits(mbytes: float) -> float:
    """Convert a data size from megabytes to bits."""
    return mbytes * 8e6


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Generator for one trial, identical across strategy combinations."""
    seq = np.random.SeedSequence((master_seed, point_index, trial_index))
    return np.random.default_rng(seq)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs.

    Attributes:
        power: Radio parameters.  ``power.budget_w`` is used as-is by the
            ratio sweep; the power sweep overrides it per point from
            ``budgets_dbm``.
        fading: Channel distribution (its seed field is unused here; trial
            seeds come from ``master_seed``).
        strategies: Strategies to run at every sweep point.
        knowledges: Knowledge models to pair with each strategy.
        trials: Episodes per (point, strategy, knowledge).
        master_seed: Root of the per-trial seed derivation.
        budgets_dbm: Sweep points for :func:`power_sweep`.
        ratios: ``b1/b2`` sweep points in [0, 1] for :func:`ratio_sweep`.
        b1_mbytes: Source 1 data (delivered toward source 2), power sweep.
        b2_mbytes: Source 2 data (delivered toward source 1), power sweep.
        total_mbytes: Fixed ``b1 + b2`` for the ratio sweep.
        max_slots: Per-episode guard cap.
    """

    power: PowerConfig
    fading: FadingConfig
    strategies: tuple[Strategy, ...]
    knowledges: tuple[Knowledge, ...]
    trials: int = 200
    master_seed: int = 1
    budgets_dbm: tuple[float, ...] | None = None
    ratios: tuple[float, ...] | None = None
    b1_mbytes: float = 8.5
    b2_mbytes: float = 8.5
    total_mbytes: float = 17.0
    max_slots: int = 100_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        object.__setattr__(self, "knowledges", tuple(Knowledge(k) for k in self.knowledges))
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if not self.knowledges:
            raise ConfigError("at least one knowledge model is required")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        for name in ("b1_mbytes", "b2_mbytes", "total_mbytes"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ConfigError(f"{name} must be finite and non-negative, got {value!r}")
        if self.budgets_dbm is not None:
            object.__setattr__(self, "budgets_dbm", tuple(float(v) for v in self.budgets_dbm))
        if self.ratios is not None:
            ratios = tuple(float(v) for v in self.ratios)
            for r in ratios:
                if not 0.0 <= r <= 1.0:
                    raise ConfigError(f"ratios must lie in [0, 1], got {r!r}")
            object.__setattr__(self, "ratios", ratios)


@dataclass(frozen=True)
class PointSpans:
    """Raw per-trial spans of one sweep combination."""

    sweep_value: float
    strategy: Strategy
    knowledge: Knowledge
    spans: np.ndarray


@dataclass(frozen=True)
class SummaryRow:
    """Aggregated result of one sweep combination."""

    sweep_value: float
    strategy: str
    knowledge: str
    mean_span_slots: float
    stderr: float
    trials: int


def _combo_spans(
    cfg: ExperimentConfig,
    point_index: int,
    power: PowerConfig,
    buffers: RelayBuffers,
    strategy: Strategy,
    knowledge: Knowledge,
) -> np.ndarray:
    spans = np.empty(cfg.trials)
    for t in range(cfg.trials):
        rng = trial_rng(cfg.master_seed, point_index, t)
        spans[t] = run_relay(
            strategy, buffers, cfg.fading, power, knowledge, rng,
            max_slots=cfg.max_slots,
        )
    return spans


def power_sweep_spans(cfg: ExperimentConfig) -> list[PointSpans]:
    """Run every budget point and return raw per-trial spans."""
    if not cfg.budgets_dbm:
        raise ConfigError("power sweep needs a nonempty budgets_dbm list")
    buffers = RelayBuffers(
        toward_2=mbytes_to_bits(cfg.b1_mbytes),
        toward_1=mbytes_to_bits(cfg.b2_mbytes),
    )
    results: list[PointSpans] = []
    for point_index, dbm in enumerate(cfg.budgets_dbm):
        power = replace(cfg.power, budget_w=dbm_to_watts(dbm))
        for strategy in cfg.strategies:
            for knowledge in cfg.knowledges:
                spans = _combo_spans(cfg, point_index, power, buffers, strategy, knowledge)
                results.append(PointSpans(float(dbm), strategy, knowledge, spans))
    return results


def ratio_sweep_spans(cfg: ExperimentConfig) -> list[PointSpans]:
    """Run every data-ratio point and return raw per-trial spans.

    A ratio ``r`` splits the fixed total into ``b1 = total * r / (1 + r)``
    and ``b2 = total / (1 + r)``, so ``b1/b2 == r`` and ratio 0 puts all
    data on the flow toward source 1.
    """
    if not cfg.ratios:
        raise ConfigError("ratio sweep needs a nonempty ratios list")
    total_bits = mbytes_to_bits(cfg.total_mbytes)
    results: list[PointSpans] = []
    for point_index, ratio in enumerate(cfg.ratios):
        b1 = total_bits * ratio / (1.0 + ratio)
        b2 = total_bits / (1.0 + ratio)
        buffers = RelayBuffers(toward_2=b1, toward_1=b2)
        for strategy in cfg.strategies:
            for knowledge in cfg.knowledges:
                spans = _combo_spans(cfg, point_index, cfg.power, buffers, strategy, knowledge)
                results.append(PointSpans(float(ratio), strategy, knowledge, spans))
    return results


def summarize(points: list[PointSpans]) -> list[SummaryRow]:
    """Aggregate raw spans into mean and standard error rows."""
    rows: list[SummaryRow] = []
    for p in points:
        n = int(p.spans.size)
        if n < 1:
            raise DomainError("cannot summarize an empty span array")
        mean = float(np.mean(p.spans))
        stderr = float(np.std(p.spans, ddof=1) / math.sqrt(n)) if n >= 2 else 0.0
        rows.append(
            SummaryRow(
                sweep_value=p.sweep_value,
                strategy=p.strategy.value,
                knowledge=p.knowledge.value,
                mean_span_slots=mean,
                stderr=stderr,
                trials=n,
            )
        )
    return rows


def power_sweep(cfg: ExperimentConfig) -> list[SummaryRow]:
    """Average span versus power budget; see :func:`power_sweep_spans`."""
    return summarize(power_sweep_spans(cfg))


def ratio_sweep(cfg: ExperimentConfig) -> list[SummaryRow]:
    """Average span versus data ratio; see :func:`ratio_sweep_spans`."""
    return summarize(ratio_sweep_spans(cfg))


def write_summary_csv(rows: list[SummaryRow], path: str) -> None:
    """Write summary rows to ``path``; float columns use ``repr`` so the
    output is byte-identical across runs with the same seed."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_CSV_HEADER.split(","))
        for row in rows:
            writer.writerow(
                [
                    repr(row.sweep_value),
                    row.strategy,
                    row.knowledge,
                    repr(row.mean_span_slots),
                    repr(row.stderr),
                    row.trials,
                ]
            )
