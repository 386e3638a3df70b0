import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
# Extend python import path to get lognormal_surrogates package from here
sys.path += [ROOT.as_posix()]

from lognormal_surrogates.dists import Lognormal
from lognormal_surrogates.mapping import NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT, forward
from lognormal_surrogates.oracle import McConfig
from lognormal_surrogates.specfun import ContourConfig


# ----------------------------------------------------------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------------------------------------------------------


def assert_close(actual, expected, rel=1e-6, abs_=0.0):
    """Relative comparison that prints both values on failure"""
    assert abs(actual - expected) <= max(rel * abs(expected), abs_), f"{actual!r} != {expected!r}"


# ----------------------------------------------------------------------------------------------------------------------
# Fixtures
# ----------------------------------------------------------------------------------------------------------------------


@pytest.fixture
def tight():
    """Contour settings for comparisons against closed forms"""
    return ContourConfig(rtol=1e-10)


@pytest.fixture
def small_mc():
    """Monte Carlo settings small enough for unit tests"""
    return McConfig(samples=200_000, seed=1234, batch_size=50_000)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(42)))


@pytest.fixture
def surrogate():
    """Factory for forward-mapped surrogate products"""

    def __wrapped(nu: float = 0.5, sigma: float = 0.5, n: int = 5, inverse: bool = False):
        family = INV_NAKAGAMI_PRODUCT if inverse else NAKAGAMI_PRODUCT
        return forward(Lognormal(nu, sigma), n, family).to_product()

    return __wrapped
