"""Exact checks for shifted symplectic and Lagrangian structures on classifying
stacks, quasi-Hamiltonian spaces, surface cobordisms and character stacks."""

__version__ = "0.1.0"
