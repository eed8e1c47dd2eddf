"""Equilibria of two-turn games between two teams of no-signaling provers."""

__version__ = "0.1.0"
