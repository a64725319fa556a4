"""Exact computation with quantized enveloping algebras of type A, their
triangular right coideal subalgebras, and small-rank Weyl group
combinatorics."""

__all__ = [
    "coeff",
    "rootsys",
    "weylsupp",
    "uqalg",
    "coideal",
    "borel",
    "cli",
]
