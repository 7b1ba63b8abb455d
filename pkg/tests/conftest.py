import numpy as np
import pytest

from hypershift import make_potential
from hypershift.radial import phase_spectrum


@pytest.fixture(scope="session")
def pot_gauss():
    return make_potential("gaussian_rho", A=1.0, sigma=1.0)


@pytest.fixture(scope="session")
def spec_gauss_30(pot_gauss):
    """Shared medium-size spectrum: gaussian well at lam = 30, n = 1."""
    return phase_spectrum(30.0, 640, pot_gauss, 1, tol=1e-9)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
