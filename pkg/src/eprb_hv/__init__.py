"""Simulation and audit toolkit for hidden-variable models of the EPRB singlet experiment."""

__version__ = "0.1.0"
