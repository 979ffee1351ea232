"""Flows on Cayley graphs of free soluble groups: word problem, exact lengths,
dead-end depth, shortest relations and growth."""

import sys

from .words import FreeWord, cyclic_reduce, enumerate_irreducible, parse, reduce
from .tower import GroupSpec, SolubleElement, from_word, multiply, invert, equals, canonical_hash, abelianization
from .geodesic import GeodesicResult, length_exact_metabelian, length_connected_balanced, bfs_length_oracle

# Constructed dead-end flows carry multipliers 2**i with tens of thousands of bits.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

__version__ = "0.1.0"

__all__ = [
    "FreeWord", "cyclic_reduce", "enumerate_irreducible", "parse", "reduce",
    "GroupSpec", "SolubleElement", "from_word", "multiply", "invert", "equals", "canonical_hash", "abelianization",
    "GeodesicResult", "length_exact_metabelian", "length_connected_balanced", "bfs_length_oracle",
]
