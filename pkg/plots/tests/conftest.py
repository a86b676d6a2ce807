"""Shared fixtures: schema-conformant CSV files written on the fly."""

from __future__ import annotations

import itertools
from pathlib import Path

import pytest


@pytest.fixture
def make_csv(tmp_path):
    """Write a small schema CSV into the test tmp dir and return its path."""

    counter = itertools.count()

    def write(names, rows, comments=("thermochain 0.0.0",), name=None) -> Path:
        path = tmp_path / (name or f"table{next(counter)}.csv")
        lines = [f"# {comment}" for comment in comments]
        lines.append(",".join(names))
        for row in rows:
            lines.append(",".join(format(value, ".17g") for value in row))
        path.write_text("\n".join(lines) + "\n")
        return path

    return write
