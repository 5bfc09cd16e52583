"""Coherence-optics simulator for second-order intensity correlations in an AOM-dressed MZI."""

__version__ = "0.1.0"
