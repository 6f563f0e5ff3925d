"""Exact topological recursion on genus-zero spectral curves.

Subpackages are organized by layer:

- scalar, poly, ratfunc, series, multivar, soperator: exact algebra
- psi: weight functions and their deformation partners
- curve: spectral curve data and the curve-level transforms
- engine: the (log) topological recursion and its consistency checks
- extended: hypergraph-weighted generating differentials
- duality: x-y duality, symplectic duality and the structural checks
- hurwitz: weighted double Hurwitz numbers and independent oracles
- cli: command line front end
"""

__version__ = "0.1.0"
