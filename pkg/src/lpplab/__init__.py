"""Last-passage percolation convergence lab: coupled exponential LPP, TASEP."""

__version__ = "0.1.0"
