"""Extragradient on hypomonotone operators: build, certify, iterate, analyze."""

__version__ = "0.1.0"
