"""Simulation and moment bounds for SIS epidemics on open networks."""

__version__ = "0.1.0"
