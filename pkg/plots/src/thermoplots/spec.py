"""Declarative plot specifications.

A plot spec is a JSON document describing one output figure: which CSV
files to read, which columns become which series, how the panels are
laid out, and where the image goes.  Specs are meant to be checked in
next to the data layout they describe, so every relative path in a spec
(both CSV inputs and the output image) resolves against the directory
containing the spec file, not the working directory of the renderer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import SpecError

__all__ = ["SeriesSpec", "PanelSpec", "PlotSpec", "load_spec"]

_STYLES = ("line", "markers")
_FORMATS = ("png", "svg", "pdf")


@dataclass(frozen=True)
class SeriesSpec:
    """One curve: a (x, y) column pair from one CSV, with a legend label."""

    csv: Path
    y: str
    label: str
    x: str = "t"
    style: str = "line"


@dataclass(frozen=True)
class PanelSpec:
    """One axes: a list of series plus optional title and axis labels."""

    series: tuple[SeriesSpec, ...]
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None


@dataclass(frozen=True)
class PlotSpec:
    """One figure: panels on a grid, written to ``output`` as ``format``."""

    output: Path
    format: str
    panels: tuple[PanelSpec, ...]
    layout: tuple[int, int] = (1, 1)
    title: str | None = None
    figsize: tuple[float, float] | None = None

    def csv_paths(self) -> tuple[Path, ...]:
        """All distinct CSV inputs, in first-reference order."""
        seen: dict[Path, None] = {}
        for panel in self.panels:
            for series in panel.series:
                seen.setdefault(series.csv, None)
        return tuple(seen)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise SpecError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _string(value, context: str) -> str:
    if not isinstance(value, str) or not value:
        raise SpecError(f"{context}: expected a non-empty string, got {value!r}")
    return value


def _parse_series(raw, base: Path, context: str) -> SeriesSpec:
    if not isinstance(raw, dict):
        raise SpecError(f"{context}: expected an object, got {type(raw).__name__}")
    csv_path = base / _string(_require(raw, "csv", context), f"{context}.csv")
    y = _string(_require(raw, "y", context), f"{context}.y")
    label = _string(_require(raw, "label", context), f"{context}.label")
    x = _string(raw.get("x", "t"), f"{context}.x")
    style = _string(raw.get("style", "line"), f"{context}.style")
    if style not in _STYLES:
        raise SpecError(
            f"{context}.style: unknown style {style!r}; choose from {_STYLES}"
        )
    unknown = set(raw) - {"csv", "y", "label", "x", "style"}
    if unknown:
        raise SpecError(f"{context}: unknown keys {sorted(unknown)}")
    return SeriesSpec(csv=csv_path, y=y, label=label, x=x, style=style)


def _parse_panel(raw, base: Path, context: str) -> PanelSpec:
    if not isinstance(raw, dict):
        raise SpecError(f"{context}: expected an object, got {type(raw).__name__}")
    raw_series = _require(raw, "series", context)
    if not isinstance(raw_series, list) or not raw_series:
        raise SpecError(f"{context}.series: expected a non-empty list")
    series = tuple(
        _parse_series(item, base, f"{context}.series[{i}]")
        for i, item in enumerate(raw_series)
    )
    for key in ("title", "xlabel", "ylabel"):
        if key in raw and raw[key] is not None:
            _string(raw[key], f"{context}.{key}")
    unknown = set(raw) - {"series", "title", "xlabel", "ylabel"}
    if unknown:
        raise SpecError(f"{context}: unknown keys {sorted(unknown)}")
    return PanelSpec(
        series=series,
        title=raw.get("title"),
        xlabel=raw.get("xlabel"),
        ylabel=raw.get("ylabel"),
    )


def load_spec(path: str | Path) -> PlotSpec:
    """Parse and validate one plot spec file."""
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"plot spec not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise SpecError(f"{path}: top level must be an object")

    base = path.parent
    context = path.name

    output = base / _string(_require(raw, "output", context), f"{context}.output")
    fmt = raw.get("format")
    if fmt is None:
        fmt = output.suffix.lstrip(".").lower()
    fmt = _string(fmt, f"{context}.format").lower()
    if fmt not in _FORMATS:
        raise SpecError(
            f"{context}.format: unsupported format {fmt!r}; choose from {_FORMATS}"
        )

    raw_panels = _require(raw, "panels", context)
    if not isinstance(raw_panels, list) or not raw_panels:
        raise SpecError(f"{context}.panels: expected a non-empty list")
    panels = tuple(
        _parse_panel(item, base, f"{context}.panels[{i}]")
        for i, item in enumerate(raw_panels)
    )

    layout = raw.get("layout")
    if layout is None:
        layout = (1, len(panels))
    else:
        if (
            not isinstance(layout, list)
            or len(layout) != 2
            or not all(isinstance(v, int) and v > 0 for v in layout)
        ):
            raise SpecError(f"{context}.layout: expected [rows, cols] of positive ints")
        layout = (layout[0], layout[1])
    if layout[0] * layout[1] < len(panels):
        raise SpecError(
            f"{context}.layout: grid {layout[0]}x{layout[1]} holds fewer axes "
            f"than the {len(panels)} panels"
        )

    figsize = raw.get("figsize")
    if figsize is not None:
        if (
            not isinstance(figsize, list)
            or len(figsize) != 2
            or not all(isinstance(v, (int, float)) and v > 0 for v in figsize)
        ):
            raise SpecError(f"{context}.figsize: expected [width, height] in inches")
        figsize = (float(figsize[0]), float(figsize[1]))

    if "title" in raw and raw["title"] is not None:
        _string(raw["title"], f"{context}.title")

    unknown = set(raw) - {"output", "format", "panels", "layout", "title", "figsize"}
    if unknown:
        raise SpecError(f"{context}: unknown keys {sorted(unknown)}")

    return PlotSpec(
        output=output,
        format=fmt,
        panels=panels,
        layout=layout,
        title=raw.get("title"),
        figsize=figsize,
    )
