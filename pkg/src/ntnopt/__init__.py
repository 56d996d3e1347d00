"""Multi-layer satellite constellation simulator and throughput/fairness optimizer."""

__version__ = "0.1.0"
