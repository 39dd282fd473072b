"""Access to the bundled fixture files (states, channels, ensembles)."""

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture such as ``bell.json``."""
    return Path(resources.files("densecode") / "fixtures" / name)
