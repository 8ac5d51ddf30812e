"""Workbench for first-order Kripke semantics with truth-functional connectives."""

__version__ = "0.1.0"
