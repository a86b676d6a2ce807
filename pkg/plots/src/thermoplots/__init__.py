"""Static comparison figures rendered from simulation CSV time series.

The package is deliberately decoupled from the simulation code: it
consumes only the public CSV schema and speaks to the world through
declarative plot specs, so figures stay reproducible from checked-in
artifacts alone.
"""

__version__ = "0.1.0"

from .csvdata import DataTable, load_table
from .errors import DataFormatError, MissingColumnError, PlotError, SpecError
from .render import render
from .spec import PanelSpec, PlotSpec, SeriesSpec, load_spec

__all__ = [
    "DataFormatError",
    "DataTable",
    "MissingColumnError",
    "PanelSpec",
    "PlotError",
    "PlotSpec",
    "SeriesSpec",
    "SpecError",
    "load_spec",
    "load_table",
    "render",
    "__version__",
]
