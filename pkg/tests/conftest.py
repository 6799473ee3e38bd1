import numpy as np
import pytest


@pytest.fixture
def rng():
    # one fixed stream per test; tests that need several streams spawn their own
    return np.random.default_rng(0xBEEF)
