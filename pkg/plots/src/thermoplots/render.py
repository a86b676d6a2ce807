"""Render a plot spec to an image file.

Rendering is deterministic: the same spec over the same CSV inputs
produces byte-identical output.  That requires stripping every
timestamp matplotlib would otherwise embed (PNG omits the creation
time by default, SVG and PDF need it suppressed explicitly) and
pinning the SVG id hash salt.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import __version__
from .csvdata import DataTable, load_table
from .spec import PlotSpec, SeriesSpec

__all__ = ["render"]

_DPI = 150
_MARKERS = ("o", "s", "^", "D", "v", "x", "+")


def _save_kwargs(fmt: str) -> dict:
    # metadata keys differ per backend; each one below disables the
    # embedded timestamp or replaces it with stable provenance
    if fmt == "png":
        return {"metadata": {"Software": f"thermoplots {__version__}"}}
    if fmt == "svg":
        return {"metadata": {"Date": None}}
    if fmt == "pdf":
        return {"metadata": {"CreationDate": None}}
    raise ValueError(f"unsupported format: {fmt}")


def _draw_series(ax, series: SeriesSpec, table: DataTable, index: int) -> None:
    x = table.column(series.x)
    y = table.column(series.y)
    if series.style == "markers":
        ax.plot(
            x,
            y,
            linestyle="none",
            marker=_MARKERS[index % len(_MARKERS)],
            markersize=4,
            markerfacecolor="none",
            label=series.label,
        )
    else:
        ax.plot(x, y, label=series.label)


def render(plotspec: PlotSpec) -> Path:
    """Draw the figure described by ``plotspec`` and return the image path.

    All referenced CSV columns are resolved before any drawing starts,
    so a bad spec fails without leaving a half-written image behind.
    """
    tables = {path: load_table(path) for path in plotspec.csv_paths()}
    for panel in plotspec.panels:
        for series in panel.series:
            table = tables[series.csv]
            table.column(series.x)
            table.column(series.y)

    rows, cols = plotspec.layout
    figsize = plotspec.figsize
    if figsize is None:
        figsize = (4.8 * cols, 3.6 * rows)

    with matplotlib.rc_context({"svg.hashsalt": "thermoplots"}):
        fig, axes = plt.subplots(
            rows, cols, figsize=figsize, squeeze=False, constrained_layout=True
        )
        try:
            flat = axes.ravel()
            for ax in flat[len(plotspec.panels) :]:
                ax.set_axis_off()
            for ax, panel in zip(flat, plotspec.panels):
                for index, series in enumerate(panel.series):
                    _draw_series(ax, series, tables[series.csv], index)
                if panel.title:
                    ax.set_title(panel.title)
                if panel.xlabel:
                    ax.set_xlabel(panel.xlabel)
                if panel.ylabel:
                    ax.set_ylabel(panel.ylabel)
                ax.legend()
            if plotspec.title:
                fig.suptitle(plotspec.title)

            plotspec.output.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(
                plotspec.output,
                format=plotspec.format,
                dpi=_DPI,
                **_save_kwargs(plotspec.format),
            )
        finally:
            plt.close(fig)
    return plotspec.output
