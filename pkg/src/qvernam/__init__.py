"""Simulation library for the entanglement-keyed quantum Vernam cipher,
its key recycling, test-qubit authentication, threshold sharing ciphers
and the classical and teleportation baselines they are compared with."""

__version__ = "0.1.0"
