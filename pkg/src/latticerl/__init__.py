"""Lattice agents that co-learn dilemma strategies and partner selection with deep Q-learning."""

__version__ = "0.1.0"
