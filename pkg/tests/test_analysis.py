import math

import numpy as np
import pytest

from conftest import make_problem
from fracspde.analysis import (
    HolderReport,
    estimate_holder,
    factorization_prefactor,
    factorization_reconstruct,
    holder_ensemble_summary,
    theoretical_holder_bound,
)
from fracspde.errors import DomainError
from fracspde.noise import CovarianceSpec
from fracspde.solver import InitialCondition, NonlinearitySpec, Problem, solve_mild_picard


def test_main_bound():
    assert theoretical_holder_bound(0.3, 1.0)["main"] == pytest.approx(0.2)


def test_factorization_bound_capped_by_beta():
    assert theoretical_holder_bound(0.3, 0.9, d=1)["factorization"] == pytest.approx(0.45)


def test_constant_h_bound():
    assert theoretical_holder_bound(0.3, 1.0)["constant_h"] == pytest.approx(0.5)


@pytest.mark.parametrize("args", [(0.5, 1.0, 1), (0.3, 0.0, 1), (0.3, 1.0, 0)])
def test_bound_ranges(args):
    with pytest.raises(DomainError):
        theoretical_holder_bound(*args)


def test_linear_path_slope_one():
    t = np.linspace(0, 1, 257)
    rep = estimate_holder((t, np.outer(t, np.ones(5)), np.full(5, 0.2)))
    assert rep.theta == pytest.approx(1.0, abs=0.02)
    assert rep.r_squared > 0.999
    assert rep.lags[0] == pytest.approx(4 / 256) and rep.lags[-1] == pytest.approx(0.25)


def test_additive_noise_path_recovers_hurst():
    H = 0.75
    p = make_problem(
        seed=1,
        n_steps=2048,
        H=H,
        cov=CovarianceSpec(1),
        g=NonlinearitySpec.zero(),
        h=NonlinearitySpec.constant(1.0),
        phi=InitialCondition.constant(0.0),
    )
    u = solve_mild_picard(p)
    assert np.allclose(u.values, p.noise.mode_paths[0][:, None], atol=1e-12)
    assert estimate_holder(u).theta == pytest.approx(H, abs=0.05)


def test_constant_path_is_flagged_not_raised():
    t = np.linspace(0, 1, 129)
    rep = estimate_holder((t, np.full(129, 3.0), None), bound=0.2)
    assert rep.undefined and math.isnan(rep.theta) and rep.passed is None


def test_too_few_points():
    t = np.linspace(0, 1, 32)
    with pytest.raises(DomainError):
        estimate_holder((t, t, None))


def test_max_statistic_dominates_median():
    rng = np.random.default_rng(3)
    t = np.linspace(0, 1, 257)
    v = np.cumsum(rng.standard_normal(257)) / 16
    med = estimate_holder((t, v, None))
    mx = estimate_holder((t, v, None), statistic="max")
    assert all(b >= a for a, b in zip(med.statistics, mx.statistics))


def test_pass_flag_and_prefactor_proxy():
    t = np.linspace(0, 1, 257)
    rep = estimate_holder((t, 2 * t, None), bound=0.2, norm=1.0)
    assert rep.passed
    assert rep.prefactor == pytest.approx(2.0, rel=1e-6)
    assert rep.R_proxy == pytest.approx(1.0, rel=1e-6)


def test_ensemble_summary():
    reports = [HolderReport(0.5 + 0.01 * i, 0.99, [0.1], [1.0], 1.0 + i, 1.0 + i, "median", bound=0.2, passed=True) for i in range(5)]
    s = holder_ensemble_summary(reports, r_alpha=[1, 2, 3, 4, 5])
    assert s["pass_rate"] == 1.0
    assert s["rank_correlation_R_proxy_r_alpha"] == pytest.approx(1.0)


# -- factorization ----------------------------------------------------------------------


def test_prefactor_at_half():
    # the open interval excludes 1/2 itself; the prefactor tends to 1/pi there
    assert factorization_prefactor(0.5 - 1e-12) == pytest.approx(1 / math.pi, rel=1e-9)
    assert math.sin(0.5 * math.pi) / math.pi == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("eps", [0.0, 0.5, 0.7])
def test_epsilon_range(eps):
    with pytest.raises(DomainError):
        factorization_prefactor(eps)


def test_zero_h_gives_zero_on_both_sides():
    p = make_problem(h=NonlinearitySpec.zero())
    u = solve_mild_picard(p)
    rep = factorization_reconstruct(p.kernel, u, p.h, p.noise, 0.25)
    assert rep["sup_discrepancy"] == 0.0 and rep["sup_norm_C"] == 0.0


def test_factorization_discrepancy_decreases_under_refinement():
    fine = make_problem(n_steps=256, seed=2)
    rel = []
    for stride in (4, 2, 1):
        p = Problem(fine.kernel, fine.noise.restrict(None, stride), fine.phi, fine.g, fine.h, fine.alpha)
        u = solve_mild_picard(p)
        rel.append(factorization_reconstruct(p.kernel, u, p.h, p.noise, 0.25)["relative_discrepancy"])
    assert rel[0] > rel[1] > rel[2]
