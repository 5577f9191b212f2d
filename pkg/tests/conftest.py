import numpy as np
import pytest

from fimsim import FimGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(20240417)


@pytest.fixture
def quad_geom():
    """2x2 half-spaced array at 28 GHz with a one-wavelength morphing range."""
    lam = 3e8 / 28e9
    return FimGeometry.half_spaced(2, 2, lam, -lam, lam)
