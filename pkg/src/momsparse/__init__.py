"""Moment relaxations for completely positive and nonnegative matrix rank bounds."""
__version__ = "0.1.0"
