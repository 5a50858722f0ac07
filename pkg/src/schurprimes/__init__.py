"""Monochromatic solutions of p1 + p2 = p3 + 1 in k-colored primes.

Exact witness search plus an executable version of the Fourier/Bohr-set
transference argument, with every inequality reported at the scale run.
"""

__version__ = "0.1.0"
