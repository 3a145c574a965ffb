"""Exact verification of ping-pong embeddings into SL_n(Z) and related finite checks."""

__version__ = "0.1.0"
