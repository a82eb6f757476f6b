"""Topological anomaly detection for network flow logs."""

__version__ = "0.1.0"
