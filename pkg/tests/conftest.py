import numpy as np
import pytest

from fedsaddle import kernels, make_quadratic_saddle


def rng_for(tag, seed=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag))))


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    with kernels.forced_backend(request.param):
        yield request.param


@pytest.fixture
def small_quadratic():
    return make_quadratic_saddle(
        d1=6, d2=5, num_clients=4, kappa=6.0, mu=1.0,
        noise_sigma=0.2, zeta=0.8, seed=5,
    )


@pytest.fixture
def noiseless_quadratic():
    return make_quadratic_saddle(
        d1=6, d2=5, num_clients=4, kappa=6.0, mu=1.0,
        noise_sigma=0.0, zeta=0.8, seed=5,
    )
