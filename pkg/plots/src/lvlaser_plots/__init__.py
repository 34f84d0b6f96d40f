"""Figure renderers for lvlaser CSV output: pure consumers of the file contract."""

__version__ = "0.1.0"
