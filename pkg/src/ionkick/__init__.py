"""Spin-dependent-kick gate engine for trapped ions."""

__version__ = "0.1.0"
