"""Equivariant harmonic self-maps of spheres via a reduced profile ODE.

The package constructs profiles h(x) on the real line solving

    h'' - (m-1) tanh(x) h' + (omega/2)(1 + nu(x)) sin(2h) = 0

with h(+-inf) = +-pi/2, computes their weighted energies, Morse indices and
nullities through a Schrodinger-form reduction of the second variation, and
exhibits explicit negative subspaces of arbitrary dimension at the singular
equator map when (m-1)^2/4 < omega.
"""

__version__ = "0.1.0"
