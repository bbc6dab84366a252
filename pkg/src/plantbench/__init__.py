"""Exact finite-scale workbench for multi-planted-clique relaxation objects.

Builds the truncated-Fourier pseudoexpectation for multiple planted cliques
and the row-mixture/statistical-dimension objects for multiple planted
bicliques, and tests their finite-n identities, inequalities and constraints
against brute-force oracles with exact rational arithmetic.
"""

__version__ = "0.1.0"
