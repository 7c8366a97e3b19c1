import numpy as np
import pytest

from plantgap.reductions import derive_pds_star_params


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


@pytest.fixture(scope="session")
def c1_params():
    """The reference reduction point used throughout: a planted-clique source
    at ambient 1/2 landing on a 250-vertex target."""
    return derive_pds_star_params(100, 10, 1.0, 0.5, 5)


@pytest.fixture(scope="session")
def small_params():
    # smallest pipeline that exercises every stage: n=52, m=26, k=26
    return derive_pds_star_params(20, 2, 1.0, 0.5, 2)
