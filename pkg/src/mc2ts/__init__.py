"""Mixed-criticality Monte Carlo tree search for mission planning."""

__version__ = "0.1.0"
