import numpy as np
import pytest

from twocurve import FactorState, ModelParams


@pytest.fixture
def params():
    return ModelParams(
        b1=0.5, b2=0.3, b3=0.4,
        sigma1=0.01, sigma2=0.02, sigma3=0.015,
        kappa=0.3, psi0=(0.01, 0.05, 0.05),
    )


@pytest.fixture
def state(params):
    return FactorState(0.0, params.psi0)


def random_params(rng: np.random.Generator, caplet_safe: bool = False) -> ModelParams:
    """Draw within the documented validation ranges: b in [0.05, 1],
    sigma in [0.001, 0.05], kappa in [-0.5, 1]."""
    b = rng.uniform(0.05, 1.0, size=3)
    s = rng.uniform(0.001, 0.05, size=3)
    if caplet_safe:
        b[2] = max(b[2], s[2] / np.sqrt(2.0) * 1.05)
    return ModelParams(
        b1=b[0], b2=b[1], b3=b[2],
        sigma1=s[0], sigma2=s[1], sigma3=s[2],
        kappa=rng.uniform(-0.5, 1.0),
        psi0=tuple(rng.uniform(-0.02, 0.06, size=3)),
    )
