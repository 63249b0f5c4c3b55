"""
Shared fixtures for the SpanLab test suite
"""

import pytest

from src.generators.families import build_family
from src.models.graph import FamilySpec, Graph


@pytest.fixture
def square_spec() -> FamilySpec:
    return FamilySpec.square_of_cycle()


@pytest.fixture
def square8(square_spec) -> Graph:
    return build_family(square_spec, 8)


@pytest.fixture
def square10(square_spec) -> Graph:
    return build_family(square_spec, 10)


@pytest.fixture
def square12(square_spec) -> Graph:
    return build_family(square_spec, 12)


@pytest.fixture
def prism() -> Graph:
    """Triangular prism: 3-regular with two triangles"""
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    return Graph.from_edges(6, edges, d=3)
