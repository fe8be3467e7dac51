from fractions import Fraction

import pytest

from finitegap.elliptic import ExactRoots, lattice_from_roots


@pytest.fixture(scope="session")
def roots():
    return ExactRoots(Fraction(3), Fraction(-1), Fraction(-2))


@pytest.fixture(scope="session")
def lat(roots):
    return lattice_from_roots(roots, 30)
