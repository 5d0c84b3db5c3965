"""Reconstruct basic graph patterns from Triple Pattern Fragment server logs."""

from importlib.resources import files

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a bundled fixture file."""
    return files(__name__) / "fixtures" / name
