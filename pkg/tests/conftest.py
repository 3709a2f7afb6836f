import numpy as np
import pytest

from hfh import medium
from hfh.fourier import Cell


@pytest.fixture(scope="session")
def cell1d():
    return Cell((1.0,))


@pytest.fixture(scope="session")
def const_medium(cell1d):
    return medium.build_scalar_medium(1.0, 1.0, cell1d, 1)


@pytest.fixture(scope="session")
def two_phase(cell1d):
    # a: 1 on [0, 0.5), 4 on [0.5, 1); b = 1
    return medium.build_scalar_medium(medium.piecewise([0.0, 0.5], [1.0, 4.0]), 1.0, cell1d, 16)


@pytest.fixture(scope="session")
def two_phase_coarse(cell1d):
    # same phases, lower band limit; used for the fine-grid time-domain runs
    return medium.build_scalar_medium(medium.piecewise([0.0, 0.5], [1.0, 4.0]), 1.0, cell1d, 8)


@pytest.fixture(scope="session")
def mathieu_blocks(cell1d):
    # V(x) = 2 cos(2 pi x), m = 1/2, e = 1, no magnetic potential
    return medium.build_schrodinger_blocks(0.5, 1.0, medium.cosine(0.0, [((1,), 2.0)]),
                                           None, cell1d, 16)


@pytest.fixture(scope="session")
def vector_medium(cell1d):
    # coupled two-component 1D medium: symmetric positive stiffness with
    # off-diagonal coupling, constant coupled density
    a_terms = {
        (0, 0, 0, 0): medium.cosine(2.0, [((1,), 0.5)]),
        (1, 0, 1, 0): medium.cosine(1.0, [((1,), 0.3)]),
        (0, 0, 1, 0): medium.cosine(0.25, [((1,), 0.1)]),
        (1, 0, 0, 0): medium.cosine(0.25, [((1,), 0.1)]),
    }
    b = [[1.0, 0.15], [0.15, 1.0]]
    return medium.build_vector_medium(2, a_terms, b, cell1d, 8)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
