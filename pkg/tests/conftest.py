from fractions import Fraction

import numpy as np
import pytest

from poisson_forge.algebra import BilinearForm, LinearEndo, TwoCocycle, abelian, so3
from poisson_forge.poisson import PoissonStructure
from poisson_forge.polynomial import Polynomial


@pytest.fixture
def g3():
    return so3()


@pytest.fixture
def kks(g3):
    return PoissonStructure.linear(g3)


@pytest.fixture
def affine_so3(g3):
    return PoissonStructure.from_form_and_derivation(g3, BilinearForm.identity(3), LinearEndo.inner(g3, [0, 0, 1]))


@pytest.fixture
def plane():
    """Constant structure on R^2 with {x1, x2} = 1."""
    return PoissonStructure.constant([[0, 1], [-1, 0]])


@pytest.fixture
def affine_plane():
    return PoissonStructure.affine(abelian(2), TwoCocycle.from_entries(2, [(0, 1, 1)]).matrix)


@pytest.fixture
def x3():
    return Polynomial.variables(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def frac_vec(rng, n, lo=-9, hi=10, den=5):
    return tuple(Fraction(int(rng.integers(lo, hi)), int(rng.integers(1, den))) for _ in range(n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
