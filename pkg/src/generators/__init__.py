"""
Deterministic family constructions and random graph generators
"""

from .families import build_family, relabel, realize_copy, canonical_copy
from .random_graphs import RandomGraphGenerator, SharedWeights, random_regular

__all__ = [
    "build_family",
    "relabel",
    "realize_copy",
    "canonical_copy",
    "RandomGraphGenerator",
    "SharedWeights",
    "random_regular",
]
