"""Toolkit for wideband RCS-reduction surfaces built from modulated square-patch cells."""

__version__ = "0.1.0"
