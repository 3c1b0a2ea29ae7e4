"""Optimal self-protection and self-insurance for jump-process risk models."""

__version__ = "0.1.0"
