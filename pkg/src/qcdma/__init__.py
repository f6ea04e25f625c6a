"""Monte Carlo simulator for spread-spectrum multiple access of single photons."""

__version__ = "0.1.0"
