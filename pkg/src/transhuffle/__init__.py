"""Perfect shuffles built from independent lazy transpositions."""
from .core import (
    EXACT,
    REAL,
    ExactDistribution,
    LazyTransposition,
    Permutation,
    Shuffle,
    compose,
    evolve_distribution,
    identity,
    reverse_permutation,
    sample,
    transposition,
)
from .words import ReducedWord

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "REAL",
    "ExactDistribution",
    "LazyTransposition",
    "Permutation",
    "ReducedWord",
    "Shuffle",
    "compose",
    "evolve_distribution",
    "identity",
    "reverse_permutation",
    "sample",
    "transposition",
]
