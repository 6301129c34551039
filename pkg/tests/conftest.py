import numpy as np
import pytest
from scipy.linalg import expm

from epr_trajectory.gaussian import GaussianState, symplectic_form


def random_symplectic(rng, n_modes, scale=0.5):
    """expm(Omega H) for a random symmetric H is symplectic."""
    h = rng.normal(scale=scale, size=(2 * n_modes, 2 * n_modes))
    return expm(symplectic_form(n_modes) @ (h + h.T) / 2)


def random_state(rng, n_modes, max_thermal=3.0):
    """Random physical state: thermal occupations dressed by a random symplectic."""
    nu = rng.uniform(0.5, max_thermal, size=n_modes)
    s = random_symplectic(rng, n_modes)
    cov = s @ np.diag(np.repeat(nu, 2)) @ s.T
    return GaussianState(rng.normal(size=2 * n_modes), 0.5 * (cov + cov.T))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
