import numpy as np
import pytest

from txrx_duality import BeamformerState, SystemConfig
from txrx_duality.model import complex_gaussian, normalize_columns

ACCEPTANCE_LINES = []


def random_state(config, rng, powers=True):
    """Unit-norm random filters with random positive powers."""
    A = [normalize_columns(complex_gaussian(rng, (n, config.L))) for n in config.N]
    B = [normalize_columns(complex_gaussian(rng, (config.M, config.L))) for _ in range(config.K)]
    p = rng.uniform(0.1, 2.0, config.KL) if powers else np.zeros(config.KL)
    lam = rng.uniform(0.1, 2.0, config.KL) if powers else np.zeros(config.KL)
    return BeamformerState(A=A, B=B, p=p, lam=lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return SystemConfig(M=4, K=2, N=2, L=2, gamma=2.0, w=[2.0, 2.0, 1.0, 1.0], sigma2=0.5)


def scalar_config(gamma=4.0, sigma2=1.0, w=1.0):
    return SystemConfig(M=1, K=1, N=1, L=1, gamma=gamma, w=w, sigma2=sigma2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section('acceptance criteria')
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
