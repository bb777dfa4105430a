"""Best-first concolic testing of .mini programs with Monte Carlo tree search."""

__version__ = "0.1.0"
