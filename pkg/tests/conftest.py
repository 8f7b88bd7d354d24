import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fracspde.fbm import TimeGrid
from fracspde.greens import DiffusivitySpec, SpectralKernel
from fracspde.noise import CovarianceSpec, build_noise
from fracspde.solver import InitialCondition, NonlinearitySpec, Problem
from fracspde.spatial import SpatialGrid, SpectralBasis

settings.register_profile("repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def spatial():
    return SpatialGrid(65)


@pytest.fixture(scope="session")
def kernel(spatial):
    return SpectralKernel(DiffusivitySpec(), spatial, 32)


def make_problem(
    seed=0,
    n_steps=128,
    n_x=65,
    N=8,
    M=32,
    H=0.75,
    alpha=0.3,
    g=None,
    h=None,
    phi=None,
    cov=None,
    diffusivity=None,
):
    sp = SpatialGrid(n_x)
    kern = SpectralKernel(diffusivity or DiffusivitySpec(), sp, M)
    cov = cov or CovarianceSpec(N)
    noise = build_noise(cov, SpectralBasis(sp, cov.n_modes), TimeGrid(1.0, n_steps), H, seed)
    return Problem(
        kern,
        noise,
        phi or InitialCondition(coeffs=(1.0, 0.5, 0.25)),
        g or NonlinearitySpec.affine(0.0, -0.5),
        h or NonlinearitySpec.affine(0.5, 0.5),
        alpha,
    )


@pytest.fixture
def problem_factory():
    return make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
