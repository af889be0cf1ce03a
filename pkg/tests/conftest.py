import pytest

from models.schema import CavityParams, SteadyState

RESOLVED_GAMMA = 0.3
RESOLVED_GAMMA_M = 1e-5


@pytest.fixture
def resolved_params():
    """Rates of the stability diagrams, in units of omega_m."""
    return CavityParams(gamma=RESOLVED_GAMMA, gamma_m=RESOLVED_GAMMA_M, omega_m=1.0)


@pytest.fixture
def coupled():
    """Steady state carrying the same effective coupling for both kinds."""

    def build(G: float) -> SteadyState:
        return SteadyState(a0=1.0 + 0j, G_omega=G, G_gamma=G)

    return build


@pytest.fixture
def bad_cavity_params():
    return CavityParams(gamma=100.0, gamma_m=1e-3, omega_m=1.0)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
