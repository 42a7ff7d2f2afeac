"""Coded relay-server communication for hierarchical multi-task learning."""

__version__ = "0.1.0"
