"""Negative pseudo partial label extraction (NP2E) and signed GNNs."""

__version__ = "0.1.0"
