"""Numerical laboratory for lower bounds on the Morse index of closed
minimal hypersurfaces in terms of their first Betti number."""

__version__ = "0.1.0"
