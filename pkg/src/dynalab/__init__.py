"""Prioritised-Dyna laboratory: four planning-update variants, controlled model error."""

__version__ = "0.1.0"
