"""Reader for the simulation time-series CSV schema.

Files start with zero or more ``#`` comment lines (provenance: tool
version, config echo), then a header row naming the columns, then
numeric rows.  The first column is conventionally the time axis ``t``
and complex observables appear as ``<name>_re`` / ``<name>_im`` pairs,
but the reader imposes neither: any header row with unique names and
rectangular float rows is accepted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, MissingColumnError

__all__ = ["DataTable", "load_table"]


@dataclass(frozen=True)
class DataTable:
    """One parsed CSV: column names plus a dense value matrix."""

    path: str
    header_comments: tuple[str, ...]
    names: tuple[str, ...]
    values: np.ndarray  # shape (n_rows, n_columns), float64

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        """Return one column by header name.

        Raises :class:`MissingColumnError` naming the available columns
        when ``name`` is absent, so a typo in a plot spec points the
        user at the fix instead of at a KeyError.
        """
        try:
            j = self.names.index(name)
        except ValueError:
            raise MissingColumnError(name, self.path, self.names) from None
        return self.values[:, j]


def load_table(path: str | Path) -> DataTable:
    """Parse one CSV file into a :class:`DataTable`."""
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"CSV file not found: {path}")

    comments: list[str] = []
    names: tuple[str, ...] | None = None
    rows: list[list[float]] = []
    with path.open(newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record:
                continue
            if record[0].startswith("#"):
                if names is not None:
                    raise DataFormatError(
                        f"{path}:{lineno}: comment after the header row"
                    )
                comments.append(",".join(record).lstrip("# "))
                continue
            if names is None:
                header = tuple(field.strip() for field in record)
                if any(not field for field in header):
                    raise DataFormatError(f"{path}:{lineno}: empty column name")
                if len(set(header)) != len(header):
                    raise DataFormatError(f"{path}:{lineno}: duplicate column name")
                names = header
                continue
            if len(record) != len(names):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(names)} fields, got {len(record)}"
                )
            try:
                rows.append([float(field) for field in record])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None

    if names is None:
        raise DataFormatError(f"{path}: no header row")
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    values = np.asarray(rows, dtype=float)
    return DataTable(
        path=str(path),
        header_comments=tuple(comments),
        names=names,
        values=values,
    )
