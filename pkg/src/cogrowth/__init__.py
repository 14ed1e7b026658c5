"""Cogrowth of finitely presented groups: exact counts, exponent bounds and locality certificates."""

__version__ = "0.1.0"
