"""Bundled demonstration fixture: a 7-node industrial control system for a
continuous stirred tank reactor, with four entry points and the process
controller (N4) as the attack goal. All profile and action values here are
illustrative, constructed for the fixture."""

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled fixture file (e.g. 'cstr_system.json')."""
    return Path(str(resources.files(__package__).joinpath(name)))
