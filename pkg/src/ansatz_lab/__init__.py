"""Tools for counting and exploiting redundant parameters in variational ansatzes."""

__version__ = "0.1.0"
