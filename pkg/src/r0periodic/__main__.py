"""Module entry point: python -m r0periodic <subcommand> ..."""

from .cli import entry_point

entry_point()
