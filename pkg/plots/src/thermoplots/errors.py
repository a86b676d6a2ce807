"""Error taxonomy of the plotting tool."""


class PlotError(Exception):
    """Base class; the command line maps these to exit code 1."""


class SpecError(PlotError):
    """Plot spec file missing, malformed, or violating an invariant."""


class DataFormatError(PlotError):
    """CSV input does not conform to the time-series schema."""


class MissingColumnError(PlotError):
    """A spec references a column the CSV does not carry."""

    def __init__(self, column: str, path, available) -> None:
        self.column = column
        self.path = str(path)
        self.available = tuple(available)
        super().__init__(
            f"column {column!r} not found in {self.path}; "
            f"available columns: {', '.join(self.available)}"
        )
