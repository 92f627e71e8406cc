"""Flat key=value configuration files for the command-line tools.

The format is deliberately minimal: one ``key = value`` pair per line,
blank lines and ``#`` comments ignored, list values comma-separated.
Every key is typed and documented (with units) in :data:`CONFIG_KEYS`;
unknown keys or unparsable values raise :class:`ConfigError` naming the
offending line.  Serializing a mapping and parsing it back yields the same
mapping, which the CLI relies on for reproducible runs.
"""

from __future__ import annotations

from typing import Any, Mapping

from .errors import ConfigError
from .harness import ExperimentConfig, dbm_to_watts
from .power import FadingConfig, PowerConfig
from .relay import Knowledge, Strategy

__all__ = [
    "CONFIG_KEYS",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "describe_keys",
    "experiment_config_from",
    "power_config_from",
    "fading_config_from",
    "POWER_SWEEP_DEFAULTS",
    "RATIO_SWEEP_DEFAULTS",
    "FINITE_STATE_DEFAULTS",
    "TRACE_DEFAULTS",
]

# key -> (type tag, documentation with units)
CONFIG_KEYS: dict[str, tuple[str, str]] = {
    "strategies": ("str_list", "relay strategies: nc_only, nc_first, opportunistic, one_directional"),
    "knowledges": ("str_list", "allocator knowledge models: causal, noncausal"),
    "trials": ("int", "Monte-Carlo episodes per sweep point"),
    "master_seed": ("int", "root seed; trial generators derive from (seed, point index, trial index)"),
    "budgets_dbm": ("float_list", "power budgets for the budget sweep, in dBm"),
    "budget_dbm": ("float", "power budget for ratio sweeps and traces, in dBm"),
    "ratios": ("float_list", "b1/b2 data ratios in [0, 1] for the ratio sweep"),
    "b1_mbytes": ("float", "data at source 1, delivered toward source 2, in MBytes"),
    "b2_mbytes": ("float", "data at source 2, delivered toward source 1, in MBytes"),
    "total_mbytes": ("float", "fixed b1 + b2 for the ratio sweep, in MBytes"),
    "bandwidth_hz": ("float", "channel bandwidth, in Hz"),
    "noise_w": ("float", "effective noise power, in watts"),
    "slot_duration_s": ("float", "slot length, in seconds"),
    "mean_gain_1": ("float", "mean channel power gain of link 1, dimensionless"),
    "mean_gain_2": ("float", "mean channel power gain of link 2, dimensionless"),
    "deterministic_gains": ("bool", "freeze gains at their means instead of fading"),
    "max_slots": ("int", "per-episode slot cap before a guard error"),
    "levels": ("float_list", "finite-state rate levels, data units per slot, strictly increasing"),
    "probs": ("float_list", "state PMF over the lexicographically ordered level pairs"),
    "b1": ("float", "source 1 backlog for finite-state commands, data units"),
    "b2": ("float", "source 2 backlog for finite-state commands, data units"),
    "simulate_trials": ("int", "episodes behind the finite-state mean-span estimate; 0 disables"),
    "strategy": ("str", "relay strategy for single-episode traces"),
    "knowledge": ("str", "allocator knowledge for single-episode traces: causal or noncausal"),
    "seed": ("int", "generator seed for single-episode commands"),
}

_BOOL_WORDS = {
    "true": True, "yes": True, "1": True, "on": True,
    "false": False, "no": False, "0": False, "off": False,
}


def _parse_value(key: str, raw: str, line_no: int) -> Any:
    kind = CONFIG_KEYS[key][0]
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            word = raw.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(raw)
            return _BOOL_WORDS[word]
        if kind == "str":
            return raw
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        if kind == "float_list":
            return [float(p) for p in parts]
        return parts
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad {kind} value for '{key}': {raw!r}") from exc


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse configuration text into a typed mapping.

    Raises:
        ConfigError: On unknown keys, missing '=', duplicate keys, or
            values that do not parse as the key's type; messages carry the
            1-based line number.
    """
    out: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {line_no}: unknown key '{key}'")
        if key in out:
            raise ConfigError(f"line {line_no}: duplicate key '{key}'")
        out[key] = _parse_value(key, raw, line_no)
    return out


def parse_config(path: str) -> dict[str, Any]:
    """Parse the configuration file at ``path``."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    return parse_config_text(text)


def _format_value(key: str, value: Any) -> str:
    kind = CONFIG_KEYS[key][0]
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("float_list", "str_list"):
        return ", ".join(str(v) for v in value)
    return str(value)


def serialize_config(mapping: Mapping[str, Any]) -> str:
    """Render a mapping back to config text, keys in schema order."""
    unknown = set(mapping) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    lines = [
        f"{key} = {_format_value(key, mapping[key])}"
        for key in CONFIG_KEYS
        if key in mapping
    ]
    return "\n".join(lines) + "\n"


def describe_keys() -> str:
    """Human-readable reference of every config key."""
    width = max(len(k) for k in CONFIG_KEYS)
    return "\n".join(
        f"{key.ljust(width)}  ({kind})  {doc}"
        for key, (kind, doc) in CONFIG_KEYS.items()
    )


# Per-command defaults.  The sweep profiles follow the comparative
# experiments: equal 8.5 MByte buffers over a -10..0 dBm budget sweep, and
# a 17 MByte total split by ratio at -6 dBm.  The 2 ms slot keeps spans in
# the tens of slots at these operating points so trends resolve.
_COMMON_RADIO: dict[str, Any] = {
    "bandwidth_hz": 1e8,
    "noise_w": 1e-12,
    "slot_duration_s": 0.002,
    "mean_gain_1": 1.0,
    "mean_gain_2": 1.0,
    "deterministic_gains": False,
    "max_slots": 100_000,
}

POWER_SWEEP_DEFAULTS: dict[str, Any] = {
    **_COMMON_RADIO,
    "strategies": ["nc_only", "one_directional"],
    "knowledges": ["causal", "noncausal"],
    "trials": 200,
    "master_seed": 1,
    "budgets_dbm": [-10.0, -9.0, -8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0],
    "b1_mbytes": 8.5,
    "b2_mbytes": 8.5,
}

RATIO_SWEEP_DEFAULTS: dict[str, Any] = {
    **_COMMON_RADIO,
    "strategies": ["nc_first", "opportunistic", "one_directional"],
    "knowledges": ["causal"],
    "trials": 200,
    "master_seed": 1,
    "budget_dbm": -6.0,
    "ratios": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    "total_mbytes": 17.0,
}

FINITE_STATE_DEFAULTS: dict[str, Any] = {
    "levels": [1.0, 2.0],
    "probs": [0.25, 0.25, 0.25, 0.25],
    "b1": 1.0,
    "b2": 1.0,
    "simulate_trials": 0,
    "seed": 1,
    "max_slots": 1_000_000,
}

TRACE_DEFAULTS: dict[str, Any] = {
    **_COMMON_RADIO,
    "strategy": "nc_first",
    "knowledge": "causal",
    "budget_dbm": -6.0,
    "b1_mbytes": 8.5,
    "b2_mbytes": 8.5,
    "seed": 1,
}


def power_config_from(mapping: Mapping[str, Any], budget_w: float) -> PowerConfig:
    """Build radio parameters from a mapping plus an explicit budget."""
    return PowerConfig(
        budget_w=budget_w,
        noise_w=float(mapping["noise_w"]),
        bandwidth_hz=float(mapping["bandwidth_hz"]),
        slot_duration_s=float(mapping["slot_duration_s"]),
    )


def fading_config_from(mapping: Mapping[str, Any]) -> FadingConfig:
    """Build the channel distribution from a mapping."""
    return FadingConfig(
        mean_gain_1=float(mapping["mean_gain_1"]),
        mean_gain_2=float(mapping["mean_gain_2"]),
        deterministic=bool(mapping["deterministic_gains"]),
        seed=int(mapping["seed"]) if "seed" in mapping else None,
    )


def _parse_enum(cls: type, value: str, what: str) -> Any:
    try:
        return cls(value)
    except ValueError:
        options = ", ".join(m.value for m in cls)  # type: ignore[attr-defined]
        raise ConfigError(f"unknown {what} {value!r}; choose from: {options}") from None


def experiment_config_from(mapping: Mapping[str, Any]) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a complete mapping.

    The mapping must already contain every needed key (commands merge
    their defaults before calling this).  The power sweep ignores
    ``budget_dbm``; the ratio sweep ignores ``budgets_dbm``.
    """
    budget_w = dbm_to_watts(float(mapping.get("budget_dbm", 0.0)))
    strategies = tuple(
        _parse_enum(Strategy, s, "strategy") for s in mapping["strategies"]
    )
    knowledges = tuple(
        _parse_enum(Knowledge, k, "knowledge") for k in mapping["knowledges"]
    )
    return ExperimentConfig(
        power=power_config_from(mapping, budget_w),
        fading=fading_config_from({k: v for k, v in mapping.items() if k != "seed"}),
        strategies=strategies,
        knowledges=knowledges,
        trials=int(mapping["trials"]),
        master_seed=int(mapping["master_seed"]),
        budgets_dbm=tuple(mapping["budgets_dbm"]) if "budgets_dbm" in mapping else None,
        ratios=tuple(mapping["ratios"]) if "ratios" in mapping else None,
        b1_mbytes=float(mapping.get("b1_mbytes", 8.5)),
        b2_mbytes=float(mapping.get("b2_mbytes", 8.5)),
        total_mbytes=float(mapping.get("total_mbytes", 17.0)),
        max_slots=int(mapping["max_slots"]),
    )
