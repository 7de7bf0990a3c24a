"""
Pytest configuration and shared fixtures for strip-factorisations tests.
"""

import pytest

from scripts.lib.groups import FiniteGroup, enumerate_automorphisms, make_group, parse_group_spec


def build(text: str) -> FiniteGroup:
    """Group from a short spec such as ``alternating:5``."""
    return make_group(parse_group_spec(text))


@pytest.fixture(scope="session")
def c2():
    """Cyclic group of order 2 (inversion is the identity)."""
    return build("cyclic:2")


@pytest.fixture(scope="session")
def c3():
    """Cyclic group of order 3, the smallest group with a uniform automorphism."""
    return build("cyclic:3")


@pytest.fixture(scope="session")
def c5():
    return build("cyclic:5")


@pytest.fixture(scope="session")
def c9():
    return build("cyclic:9")


@pytest.fixture(scope="session")
def s3():
    return build("symmetric:3")


@pytest.fixture(scope="session")
def d4():
    """Dihedral group of order 8."""
    return build("dihedral:4")


@pytest.fixture(scope="session")
def a4():
    return build("alternating:4")


@pytest.fixture(scope="session")
def s4():
    return build("symmetric:4")


@pytest.fixture(scope="session")
def a5():
    """Alternating group of degree 5, non-abelian simple of order 60."""
    return build("alternating:5")


@pytest.fixture(scope="session")
def s5():
    return build("symmetric:5")


@pytest.fixture(scope="session")
def a5_c2():
    """A5 x C2, a non-solvable group that is not simple."""
    return build("alternating:5*cyclic:2")


@pytest.fixture(scope="session")
def he3():
    """Heisenberg group of order 27: non-abelian with a uniform automorphism."""
    return build("heisenberg:3")


@pytest.fixture(scope="session")
def a5_automorphisms(a5):
    """All 120 automorphisms of A5, identity first."""
    return enumerate_automorphisms(a5)
