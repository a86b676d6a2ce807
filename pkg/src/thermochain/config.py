"""Flat key = value run configuration.

The config format is plain structured text: one ``section.key = value``
assignment per line, ``#`` comment lines, blank lines ignored.  Every
key is declared in a registry with its type and (where meaningful)
default; unknown keys, duplicates, and malformed values are rejected
with the offending key path.  A parsed config can re-emit itself in a
canonical normalized form whose SHA-256 ties output files to the exact
inputs that produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError

_REQUIRED = object()


def _parse_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    if math.isnan(val):
        raise ValueError("nan is not allowed")
    return val


def _parse_int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError as exc:
        raise ValueError(f"not an integer: {text!r}") from exc


def _parse_float_list(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(not p for p in parts):
        raise ValueError(f"not a comma-separated number list: {text!r}")
    return tuple(_parse_float(p) for p in parts)


def _fmt_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return ", ".join(format(v, ".17g") for v in value)
    return str(value)


@dataclass(frozen=True)
class KeySpec:
    parse: Callable[[str], Any]
    default: Any = None
    choices: tuple | None = None


REGISTRY: dict[str, KeySpec] = {
    "bath.family": KeySpec(str, "ohmic", choices=("ohmic", "tabulated")),
    "bath.eta": KeySpec(_parse_float),
    "bath.s": KeySpec(_parse_float, 1.0),
    "bath.omega_c": KeySpec(_parse_float, 1.0),
    "bath.omega_max": KeySpec(_parse_float),
    "bath.beta": KeySpec(_parse_float),
    "bath.statistics": KeySpec(str, "bosonic", choices=("bosonic", "fermionic")),
    "bath.table_path": KeySpec(str),
    "bath.tail_tol": KeySpec(_parse_float),
    "system.kind": KeySpec(str, "spin_dephasing",
                           choices=("spin_dephasing", "spin_transverse", "anderson_dot")),
    "system.omega_S": KeySpec(_parse_float, 0.0),
    "system.a_re": KeySpec(_parse_float, 1.0),
    "system.a_im": KeySpec(_parse_float, 0.0),
    "system.b_re": KeySpec(_parse_float, 0.0),
    "system.b_im": KeySpec(_parse_float, 0.0),
    "system.coupling_op": KeySpec(str, choices=("sigma_z", "sigma_x")),
    "anderson.U": KeySpec(_parse_float, 0.0),
    "anderson.V": KeySpec(_parse_float, 0.0),
    "anderson.t_hyb": KeySpec(_parse_float, 0.0),
    "anderson.initial_dot": KeySpec(str, "up",
                                    choices=("empty", "up", "down", "double")),
    "chain.M": KeySpec(_parse_int),
    "chain.M2": KeySpec(_parse_int),
    "chain.nodes": KeySpec(_parse_int),
    "chain.grading": KeySpec(str, choices=("linear", "log")),
    "mps.n_max": KeySpec(_parse_int),
    "mps.n_max_first": KeySpec(_parse_int),
    "mps.D_max": KeySpec(_parse_int),
    "mps.svd_tol": KeySpec(_parse_float, 1e-12),
    "evolve.dt": KeySpec(_parse_float),
    "evolve.t_final": KeySpec(_parse_float),
    "evolve.measure_stride": KeySpec(_parse_int, 1),
    "star.frequencies": KeySpec(_parse_float_list),
    "star.couplings": KeySpec(_parse_float_list),
    "run.label": KeySpec(str, "run"),
    "run.output_dir": KeySpec(str, "."),
    "run.seed": KeySpec(_parse_int, 0),  # reserved; runs are deterministic
}


@dataclass(frozen=True)
class RunConfig:
    """Validated key/value assignments plus registry defaults."""

    explicit: dict = field(default_factory=dict)

    def get(self, key: str, fallback: Any = _REQUIRED) -> Any:
        if key not in REGISTRY:
            raise ConfigError(f"unknown config key {key!r}", key=key)
        if key in self.explicit:
            return self.explicit[key]
        default = REGISTRY[key].default
        if default is not None:
            return default
        if fallback is _REQUIRED:
            return None
        return fallback

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if self.get(k) is None]
        if missing:
            raise ConfigError(
                "missing required config key(s): " + ", ".join(missing),
                key=missing[0],
            )

    def echo(self) -> str:
        """Canonical normalized text: explicit keys, sorted, one per line.

        ``run.label`` and ``run.output_dir`` are omitted so the echo (and
        the hash derived from it) identifies the computation, not where
        its artifacts happen to be written.
        """
        skip = {"run.label", "run.output_dir"}
        lines = [f"{k} = {_fmt_value(v)}"
                 for k, v in sorted(self.explicit.items()) if k not in skip]
        return "\n".join(lines)

    def override(self, **pairs) -> "RunConfig":
        updated = dict(self.explicit)
        for key, value in pairs.items():
            if value is not None:
                updated[key.replace("__", ".")] = value
        return RunConfig(explicit=updated)


def parse_config(text: str) -> RunConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in REGISTRY:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}", key=key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}", key=key)
        spec = REGISTRY[key]
        try:
            value = spec.parse(value_text)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}", key=key) from exc
        if spec.choices is not None and value not in spec.choices:
            raise ConfigError(
                f"must be one of {', '.join(spec.choices)}; got {value!r}",
                key=key,
            )
        values[key] = value
    config = RunConfig(explicit=values)
    reparsed = parse_echo_roundtrip(config)
    kept = {k: v for k, v in config.explicit.items()
            if k not in ("run.label", "run.output_dir")}
    if reparsed.explicit != kept:  # pragma: no cover - canonical by design
        raise ConfigError("config echo failed to round-trip")
    return config


def parse_echo_roundtrip(config: RunConfig) -> RunConfig:
    """Reparse the canonical echo (round-trip invariant helper)."""
    values: dict[str, Any] = {}
    for line in config.echo().splitlines():
        key, _, value_text = line.partition("=")
        key = key.strip()
        spec = REGISTRY[key]
        values[key] = spec.parse(value_text.strip())
    return RunConfig(explicit=values)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    return parse_config(text)
