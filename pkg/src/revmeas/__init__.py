"""Logically reversible measurements built from von Neumann measurements, with entropy and discord tools."""

__version__ = "0.1.0"
