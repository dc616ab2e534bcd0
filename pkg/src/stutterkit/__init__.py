"""Length-sensitivity aware LTL model checking for Petri nets."""

__version__ = "0.1.0"
