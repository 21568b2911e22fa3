"""Desk-scale testbed for LLM-driven cooperation between two embodied agents."""

__version__ = "0.1.0"
