import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(170220)


def draw_lambda_domain(rng, sat_floor=0.01):
    """Random parameters in the lambda-scheme lasing domain (sat < 0.9*s_max)."""
    from lvlaser.analysis import s_max_lambda
    from lvlaser.model import DimensionlessParams

    lam = 10.0 ** rng.uniform(1.0, 6.0)
    alpha1 = 10.0 ** rng.uniform(-2.0, 2.0)
    alpha2 = 10.0 ** rng.uniform(np.log10(1.5), 3.0)
    eta = rng.uniform(0.0, 10.0)
    probe = DimensionlessParams(lam=lam, sat=0.0, alpha1=alpha1, alpha2=alpha2, eta=eta)
    sat = 0.9 * rng.uniform(sat_floor, 1.0) * s_max_lambda(probe)
    return DimensionlessParams(lam=lam, sat=sat, alpha1=alpha1, alpha2=alpha2, eta=eta)
