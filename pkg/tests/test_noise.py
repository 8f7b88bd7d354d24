import math

import numpy as np
import pytest
from scipy.special import zeta

from fracspde.errors import ConfigError, DomainError
from fracspde.fbm import TimeGrid
from fracspde.noise import CovarianceSpec, build_noise, check_hypotheses, mode_seeds, r_alpha_H
from fracspde.solver import NonlinearitySpec
from fracspde.spatial import SpatialGrid, SpectralBasis


@pytest.fixture(scope="module")
def basis():
    return SpectralBasis(SpatialGrid(65), 32)


def test_single_constant_mode_reduces_to_the_fbm(basis):
    noise = build_noise(CovarianceSpec(1, c0=1.0), basis, TimeGrid(1.0, 32), 0.75, 4)
    W = noise.field()
    assert np.allclose(W, noise.mode_paths[0][:, None] * np.ones((1, 65)), atol=1e-15)


def test_field_increments_match_differences(basis):
    noise = build_noise(CovarianceSpec(6), basis, TimeGrid(1.0, 16), 0.7, 1)
    assert np.allclose(noise.increments(), np.diff(noise.field(), axis=0), atol=1e-13)


def test_mean_square_norm_matches_trace(basis):
    H, t_index = 0.7, 16
    cov = CovarianceSpec(4)
    grid = TimeGrid(1.0, 16)
    sq = np.array([
        float(basis.grid.norm(build_noise(cov, basis, grid, H, s).field(t_index)) ** 2) for s in range(2000)
    ])
    expected = 1.0 ** (2 * H) * cov.lambdas.sum()
    assert abs(sq.mean() - expected) < 3 * sq.std(ddof=1) / math.sqrt(sq.size)


def test_truncation_tail_bounded_and_decreasing(basis):
    cov = CovarianceSpec(32)
    grid = TimeGrid(1.0, 16)
    means = {}
    for N in (4, 8, 16):
        d = []
        for s in range(200):
            full = build_noise(cov, basis, grid, 0.75, s)
            diff = full.restrict(2 * N).field(-1) - full.restrict(N).field(-1)
            d.append(float(basis.grid.norm(diff)))
        means[N] = np.mean(d)
        tail = math.sqrt(float(np.sum(cov.lambdas[N:])))
        assert means[N] <= tail * grid.T**0.75
    assert means[4] > means[8] > means[16]


def test_hypothesis_c_violation_is_a_config_error(basis):
    with pytest.raises(ConfigError, match="Hypothesis \\(C\\)"):
        build_noise(CovarianceSpec(4, p=2.0), basis, TimeGrid(1.0, 8), 0.75, 0)


def test_basis_too_small_for_noise():
    small = SpectralBasis(SpatialGrid(9), 4)
    with pytest.raises(DomainError):
        build_noise(CovarianceSpec(6), small, TimeGrid(1.0, 8), 0.75, 0)


def test_mode_seeds_do_not_depend_on_truncation():
    assert mode_seeds(7, 3) == mode_seeds(7, 10)[:3]
    assert len(set(mode_seeds(7, 50))) == 50


def test_modes_are_mutually_independent(basis):
    grid = TimeGrid(1.0, 8)
    prods = np.array([
        np.prod(build_noise(CovarianceSpec(2), basis, grid, 0.75, s).mode_paths[:, -1]) for s in range(3000)
    ])
    assert abs(prods.mean()) < 3 * prods.std(ddof=1) / math.sqrt(prods.size)


def test_sqrt_trace_tail_matches_zeta():
    cov = CovarianceSpec(10, p=3.0)
    assert cov.sqrt_trace_tail(0) == pytest.approx(zeta(1.5), rel=1e-12)
    assert cov.sqrt_trace_tail(3) == pytest.approx(zeta(1.5) - 1 - 2**-1.5 - 3**-1.5, rel=1e-12)


# -- r_alpha^H -----------------------------------------------------------------------


def test_r_alpha_zero_spectrum(basis):
    noise = build_noise(CovarianceSpec(3, explicit=(0.0, 0.0, 0.0)), basis, TimeGrid(1.0, 16), 0.75, 0)
    assert r_alpha_H(noise, 0.3) == 0.0


def test_r_alpha_single_term(basis):
    from fracspde.fbm import lambda_alpha

    noise = build_noise(CovarianceSpec(1, c0=0.25), basis, TimeGrid(1.0, 32), 0.75, 3)
    expected = 0.5 * lambda_alpha((noise.grid.points, noise.mode_paths[0]), 0.3)
    assert r_alpha_H(noise, 0.3) == pytest.approx(expected, rel=1e-14)


def test_r_alpha_nondecreasing_in_n(basis):
    noise = build_noise(CovarianceSpec(16), basis, TimeGrid(1.0, 32), 0.75, 8)
    values = [r_alpha_H(noise, 0.3, n) for n in range(1, 17)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_r_alpha_partial_sums_dominated_by_spectral_tail(basis):
    N = 4
    grid = TimeGrid(1.0, 32)
    r_n, r_2n = [], []
    for s in range(20):
        noise = build_noise(CovarianceSpec(2 * N), basis, grid, 0.75, s)
        r_n.append(r_alpha_H(noise, 0.3, N))
        r_2n.append(r_alpha_H(noise, 0.3, 2 * N))
    change = (np.mean(r_2n) - np.mean(r_n)) / np.mean(r_2n)
    i = np.arange(1, N + 1)
    bound = (zeta(1.5) - np.sum(i**-1.5)) / zeta(1.5)
    assert 0 < change < bound


@pytest.mark.slow
def test_r_alpha_monte_carlo_mean_stable_when_doubling_modes():
    basis = SpectralBasis(SpatialGrid(257), 128)
    grid = TimeGrid(1.0, 32)
    r64, r128 = [], []
    for s in range(200):
        noise = build_noise(CovarianceSpec(128), basis, grid, 0.75, s)
        r64.append(r_alpha_H(noise, 0.3, 64))
        r128.append(r_alpha_H(noise, 0.3, 128))
    assert np.isfinite(np.mean(r128))
    assert abs(np.mean(r128) - np.mean(r64)) / np.mean(r64) < 0.05


# -- hypotheses ------------------------------------------------------------------------


def test_uniqueness_range_for_affine_h():
    rep = check_hypotheses({"H": 0.75, "alpha": 0.3, "h": NonlinearitySpec.affine(0.1, 0.5), "d": 1})
    lo, hi = rep.entries["uniqueness_range"]["interval"]
    assert lo == pytest.approx(0.25) and hi == pytest.approx(1 / 3)
    assert rep.entries["uniqueness_range"]["passed"]


def test_h_gamma_fails_at_half():
    rep = check_hypotheses({"H": 0.5, "alpha": 0.3, "gamma": 1.0})
    assert not rep.entries["H_gamma"]["passed"]
    assert "H_gamma" in " ".join(rep.failures())


def test_hypothesis_c_fails_for_p_two():
    rep = check_hypotheses({"H": 0.75, "alpha": 0.3, "cov": CovarianceSpec(8, p=2.0)})
    assert not rep.entries["C"]["passed"]


def test_alpha_range_message():
    rep = check_hypotheses({"H": 0.75, "alpha": 0.6})
    assert not rep.passed(["alpha_range"])
    assert "α ∈ (1−H, 1/2)" in rep.entries["alpha_range"]["detail"]


def test_explicit_spectrum_must_be_nonincreasing():
    assert CovarianceSpec(2, explicit=(0.1, 0.2)).violations()


def test_restrict_and_scale(basis):
    noise = build_noise(CovarianceSpec(8), basis, TimeGrid(1.0, 16), 0.75, 2)
    sub = noise.restrict(4, 2)
    assert sub.n_modes == 4 and sub.grid.n_steps == 8
    assert np.array_equal(sub.mode_paths, noise.mode_paths[:4, ::2])
    assert np.all(noise.scaled(0.0).field() == 0.0)
    with pytest.raises(DomainError):
        noise.restrict(9)
