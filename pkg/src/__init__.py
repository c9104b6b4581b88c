"""Qubit decoherence and quantum Zeno rates beyond the rotating-wave approximation."""

__version__ = "1.0.0"
