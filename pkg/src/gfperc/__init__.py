"""Monte Carlo laboratory for level-set percolation of planar Gaussian fields."""

__version__ = "0.1.0"
