"""
Command-line surface for the qaent library.
Runs spectrum, spectroscopy, population, entanglement and witness sweeps and
writes plot-ready tables with a reproducibility manifest.
"""

__version__ = "0.1.0"
