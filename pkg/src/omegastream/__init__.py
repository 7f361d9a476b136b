"""Rational functions over infinite words: continuity analysis and
compilation to deterministic streaming register machines."""

from importlib import resources


def fixture_path(name: str) -> str:
    """Absolute path of a bundled fixture, e.g. fixture_path('replace.json')."""
    return str(resources.files(__package__) / "fixtures" / name)


__all__ = ["fixture_path"]
