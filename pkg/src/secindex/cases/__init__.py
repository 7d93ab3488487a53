"""Bundled case files: the worked 4-bus example, the costly-cut comparison
instance, and the 118-bus benchmark topology."""

from importlib import resources


def path(name: str):
    """Filesystem path of a bundled case file."""
    return resources.files(__package__) / name
