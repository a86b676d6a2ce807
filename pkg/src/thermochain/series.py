"""Time-series container and the on-disk CSV format.

All producers (chain evolution, master equation, closed-form and ED
oracles) emit the same shape: a strictly increasing time grid plus named
columns.  Files carry ``#`` comment headers with the tool version, a
hash of the normalized config, and the config itself (``# cfg:`` lines)
so any output can be reproduced from the file alone.  Values are written
with 17 significant digits, which round-trips doubles exactly; repeated
runs of the same config produce byte-identical files.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ValidationError

_TIME_KEY = "t"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def config_hash(config_echo: str) -> str:
    return hashlib.sha256(config_echo.encode("utf-8")).hexdigest()


@dataclass
class TimeSeries:
    """Named columns over a common strictly increasing time grid."""

    times: np.ndarray
    columns: dict[str, np.ndarray]
    config_echo: str = ""
    diagnostics: "TimeSeries | None" = None
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ValidationError("times must be a 1-D array")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            arr = np.asarray(values)
            if arr.shape != self.times.shape:
                raise ValidationError(
                    f"column {name!r} has length {arr.size}, expected {self.times.size}"
                )
            if name == _TIME_KEY:
                raise ValidationError("'t' is reserved for the time grid")
            cols[name] = arr
        self.columns = cols

    def column_names(self) -> list[str]:
        return list(self.columns)


def _expand_columns(series: TimeSeries) -> dict[str, np.ndarray]:
    """Split complex columns into <name>_re / <name>_im pairs."""
    out: dict[str, np.ndarray] = {}
    for name, values in series.columns.items():
        if np.iscomplexobj(values):
            out[name + "_re"] = values.real
            out[name + "_im"] = values.imag
        else:
            out[name] = np.asarray(values, dtype=float)
    return out


def write_csv(series: TimeSeries, path) -> None:
    """Write a series with provenance comments; see the module docstring."""
    cols = _expand_columns(series)
    lines = [f"# thermochain {__version__}"]
    lines.append(f"# config-sha256: {config_hash(series.config_echo)}")
    for cfg_line in series.config_echo.splitlines():
        lines.append(f"# cfg:{cfg_line}")
    lines.append(",".join([_TIME_KEY, *cols]))
    arrays = list(cols.values())
    for i, t in enumerate(series.times):
        row = [_fmt(t)] + [_fmt(arr[i]) for arr in arrays]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> TimeSeries:
    """Read a file written by :func:`write_csv` (complex pairs stay split)."""
    cfg_lines: list[str] = []
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("cfg:"):
                    cfg_lines.append(body[4:])
                continue
            if header is None:
                header = [name.strip() for name in line.split(",")]
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if header is None or header[0] != _TIME_KEY:
        raise ValidationError(f"{path}: missing 't,...' header row")
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise ValidationError(f"{path}: row width does not match header")
    columns = {name: data[:, j] for j, name in enumerate(header[1:], start=1)}
    echo = "\n".join(cfg_lines) + ("\n" if cfg_lines else "")
    return TimeSeries(times=data[:, 0], columns=columns, config_echo=echo)


def compare_series(a: TimeSeries, b: TimeSeries) -> dict[str, tuple[float, float]]:
    """Per-column (max, mean) absolute deviation over the overlapping times.

    Columns present in both series are compared; ``b`` is linearly
    interpolated onto ``a``'s grid where the grids differ.
    """
    shared = [name for name in a.columns if name in b.columns]
    if not shared:
        raise ValidationError("series share no columns")
    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    if hi < lo:
        raise ValidationError("series have no overlapping time range")
    slack = 1e-12 * max(1.0, abs(hi))
    mask = (a.times >= lo - slack) & (a.times <= hi + slack)
    t_ref = a.times[mask]
    result: dict[str, tuple[float, float]] = {}
    for name in shared:
        ref = np.asarray(a.columns[name], dtype=float)[mask]
        other = np.interp(t_ref, b.times, np.asarray(b.columns[name], dtype=float))
        dev = np.abs(ref - other)
        result[name] = (float(dev.max()), float(dev.mean()))
    return result
