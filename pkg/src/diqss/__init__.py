"""Simulation and analysis of device-independent secret sharing with qudit GHZ states."""

__version__ = "0.1.0"
