"""Utility-privacy tradeoffs for databases: rate-distortion-equivocation regions,
optimal sanitization channels and a small quantize-and-bin simulator."""

__version__ = "0.1.0"
