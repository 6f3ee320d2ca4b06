"""Single source for the package version (keep in sync with pyproject)."""

__version__ = "0.1.0"
