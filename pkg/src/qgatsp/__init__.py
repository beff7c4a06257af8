"""Quantum-inspired and classical genetic algorithms for the symmetric TSP."""

__version__ = "0.1.0"
