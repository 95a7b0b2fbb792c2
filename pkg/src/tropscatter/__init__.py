"""Exact tropical scattering diagrams, bulk-deformed potentials and quantum periods."""

__version__ = "0.1.0"
