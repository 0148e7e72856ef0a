"""Quantum copy of a single-photon coherent-perfect-absorption experiment.

An experiment description is compiled to a microwave pulse schedule for a
transmon qutrit, executed on one of three simulation backends, sampled into
shots and compared against an analytic optics model.
"""

__version__ = "0.1.0"
