import numpy as np
import pytest

from whdbar.variety import WeightVector, WPolynomial, WeightedVariety


def _poly(terms, n, beta):
    return WPolynomial.from_terms(terms, n, beta)


@pytest.fixture(scope="session")
def line():
    """Sigma = {z2 = 0} in C^2, beta = (1, 1), dim 1."""
    beta = WeightVector((1, 1))
    Q = _poly([((0, 1), 1.0)], 2, beta)
    return WeightedVariety(beta, (Q,), 2, pure_dim_hint=1)


@pytest.fixture(scope="session")
def cusp():
    """z1^2 = z2^3, beta = (3, 2), weighted degree 6, dim 1."""
    beta = WeightVector((3, 2))
    Q = _poly([((2, 0), 1.0), ((0, 3), -1.0)], 2, beta)
    return WeightedVariety(beta, (Q,), 2, pure_dim_hint=1)


@pytest.fixture(scope="session")
def cone():
    """z1 z2 = z3^2, homogeneous quadric cone, dim 2."""
    beta = WeightVector((1, 1, 1))
    Q = _poly([((1, 1, 0), 1.0), ((0, 0, 2), -1.0)], 3, beta)
    return WeightedVariety(beta, (Q,), 3, pure_dim_hint=2)


@pytest.fixture(scope="session")
def brieskorn():
    """z1^2 = z2^2 z3, beta = (3, 2, 2), weighted degree 6, dim 2."""
    beta = WeightVector((3, 2, 2))
    Q = _poly([((2, 0, 0), 1.0), ((0, 2, 1), -1.0)], 3, beta)
    return WeightedVariety(beta, (Q,), 3, pure_dim_hint=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240712)
