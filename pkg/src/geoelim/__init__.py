"""Geometric elimination over constraint databases.

First-order queries over polynomial databases, quantifier-block elimination
over zero-dimensional varieties via multiplication matrices, division-free
circuit outputs with complexity metrics, and an exact Vandermonde
certificate for the scalar lower bound of extended sample point queries.
"""

__version__ = "0.1.0"
