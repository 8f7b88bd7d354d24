"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Seeds are fixed up front.  Tolerances are the published acceptance thresholds;
nothing is tuned per run.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from fracspde.analysis import estimate_holder, factorization_reconstruct, theoretical_holder_bound
from fracspde.cli import _bound_i_seed, main
from fracspde.config import ExperimentConfig
from fracspde.fbm import TimeGrid, fbm_covariance, lambda_alpha, sample_fbm_batch
from fracspde.fracint import norm_alpha_1, norm_alpha_2_T
from fracspde.greens import SpectralKernel, check_kernel_identities, check_lemma1, check_second_difference
from fracspde.io import file_sha256
from fracspde.solver import Problem, compare_solutions, solve_galerkin, solve_mild_picard
from fracspde.spatial import SpatialGrid

pytestmark = pytest.mark.acceptance

AFFINE = ExperimentConfig()  # affine g and h, H=0.75, alpha=0.3, (256, 256, 16, 128)
CONSTANT_H = AFFINE.with_overrides(h={"kind": "constant", "a": 1.0})
SEEDS = list(range(20))


@pytest.fixture
def report(capsys):
    def _report(k: int, passed: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, detail

    return _report


@pytest.fixture(scope="module")
def affine_solutions():
    return {s: solve_mild_picard(AFFINE.build_problem(s), AFFINE.tol, AFFINE.max_iter) for s in SEEDS}


def test_criterion_01_fbm_exactness(report):
    start = time.perf_counter()
    n_paths, n = 10_000, 256
    grid = TimeGrid(1.0, n)
    rng = np.random.default_rng(20260101)
    worst, ks_p = 0.0, []
    for H in (0.6, 0.75, 0.9):
        circ = sample_fbm_batch(grid, H, n_paths, seed=11, method="circulant")
        dense = sample_fbm_batch(grid, H, n_paths, seed=12, method="dense")
        i = rng.integers(1, n + 1, size=20)
        j = rng.integers(1, n + 1, size=20)
        prod = circ[:, i] * circ[:, j]
        se = prod.std(axis=0, ddof=1) / math.sqrt(n_paths)
        z = np.abs(prod.mean(axis=0) - fbm_covariance(grid.points[i], grid.points[j], H)) / se
        worst = max(worst, float(z.max()))
        ks_p.append(float(stats.ks_2samp(circ[:, -1], dense[:, -1]).pvalue))
    elapsed = time.perf_counter() - start
    passed = worst <= 3.0 and min(ks_p) >= 0.01 and elapsed < 60
    report(1, passed, f"max |z| over 60 pairs = {worst:.2f} (<= 3), min KS p = {min(ks_p):.3f} (>= 0.01), {elapsed:.1f}s (< 60)")


def test_criterion_02_lambda_closed_form(report):
    t = np.linspace(0, 1, 33)
    errs = [abs(lambda_alpha((t, t), 0.5, method=m, n_quad=4096) - 2 / math.pi) for m in ("exact", "quadrature")]
    report(2, max(errs) < 1e-4, f"|Lambda - 2/pi| exact {errs[0]:.2e}, quadrature {errs[1]:.2e} (< 1e-4)")


def test_criterion_03_kernel_identities(report):
    start = time.perf_counter()
    kernel = SpectralKernel(AFFINE.diffusivity, SpatialGrid(AFFINE.n_x), AFFINE.M)
    r = check_kernel_identities(kernel, seed=0)
    elapsed = time.perf_counter() - start
    passed = (
        r["symmetry_residual"] < 1e-10
        and r["semigroup_residual"] < 1e-10
        and r["mass_residual"] < 1e-8
        and r["overlap_residual"] < 1e-8
        and elapsed < 30
    )
    report(
        3,
        passed,
        f"symmetry {r['symmetry_residual']:.1e}, semigroup {r['semigroup_residual']:.1e}, "
        f"mass {r['mass_residual']:.1e}, overlap {r['overlap_residual']:.1e}, {elapsed:.1f}s",
    )


def test_criterion_04_kernel_estimates(report):
    start = time.perf_counter()
    kernel = SpectralKernel(AFFINE.diffusivity, SpatialGrid(AFFINE.n_x), AFFINE.M)
    parts = []
    ok = True
    for delta in (0.4, 0.5, 0.7):
        a = check_lemma1(kernel, delta, n_tuples=10_000)
        b = check_second_difference(kernel, delta, n_tuples=10_000)
        ok &= a["passed"] and b["passed"]
        parts.append(f"delta={delta}: lemma1 {'ok' if a['passed'] else 'bad'}, second difference drift {b['drift']:.3f}")
    elapsed = time.perf_counter() - start
    report(4, bool(ok and elapsed < 120), "; ".join(parts) + f"; {elapsed:.1f}s (< 120)")


def test_criterion_05_bound_i(report):
    cfg = ExperimentConfig(n_steps=128, n_x=33, N=4, M=16)
    per_seed = [_bound_i_seed((cfg, s, 100)) for s in SEEDS]
    violations = sum(p["violations"] for p in per_seed)
    worst = max(p["max_lhs_over_rhs"] for p in per_seed)
    report(5, violations == 0, f"{violations} violations in 2000 checks, worst LHS/RHS {worst:.3f}")


def test_criterion_06_norm_closed_forms(report):
    t = np.linspace(0, 1, 1025)
    n1 = norm_alpha_1(t, t, alpha=0.25)
    n2 = norm_alpha_2_T(t, t, alpha=0.25)
    c2 = math.sqrt(1 + 1 / (0.75**2 * 2.5))
    passed = abs(n1 - 4 / 3) < 1e-4 and abs(n2 - c2) < 1e-4
    report(6, passed, f"alpha,1 = {n1:.6f} (4/3), alpha,2,T = {n2:.6f} ({c2:.6f})")


def test_criterion_07_mild_equals_variational(report):
    start = time.perf_counter()
    noise = AFFINE.build_noise(0)
    rel = []
    for level in range(3):
        p = AFFINE.build_problem(level=level, levels=3, noise=noise)
        rel.append(compare_solutions(solve_mild_picard(p), solve_galerkin(p))["relative_distance"])
    elapsed = time.perf_counter() - start
    passed = rel[0] > rel[1] > rel[2] and rel[2] <= 5e-2 and elapsed < 300
    report(7, passed, "relative distances " + ", ".join(f"{v:.2e}" for v in rel) + f" (finest <= 5e-2), {elapsed:.1f}s")


def test_criterion_08_picard_contraction(report, affine_solutions):
    def contracts(r):
        return any(all(x < 1 for x in r[i : i + 3]) for i in range(len(r) - 2))

    ok = [contracts(u.diagnostics["ratios"]) for u in affine_solutions.values()]
    frac = sum(ok) / len(ok)
    report(8, frac >= 0.95, f"{sum(ok)}/{len(ok)} seeds with 3 consecutive ratios < 1 (>= 95%)")


def test_criterion_09_holder(report, affine_solutions):
    start = time.perf_counter()
    bound = theoretical_holder_bound(AFFINE.alpha, AFFINE.diffusivity.beta)["main"]
    th_aff = [estimate_holder(u).theta for u in affine_solutions.values()]
    th_con = [estimate_holder(solve_mild_picard(CONSTANT_H.build_problem(s))).theta for s in SEEDS]
    rate_aff = np.mean(np.array(th_aff) >= 0.9 * bound)
    rate_con = np.mean(np.array(th_con) >= 0.4)
    elapsed = time.perf_counter() - start
    passed = rate_aff >= 0.9 and rate_con >= 0.9 and elapsed < 600
    report(
        9,
        passed,
        f"affine: {rate_aff:.0%} with theta >= {0.9 * bound:.2f} (min {min(th_aff):.3f}); "
        f"constant h: {rate_con:.0%} with theta >= 0.4 (min {min(th_con):.3f})",
    )


def test_criterion_10_factorization(report):
    cfg = AFFINE.with_overrides(n_steps=512)
    fine = cfg.build_problem(0)
    rel = []
    for stride in (8, 4, 2, 1):
        p = Problem(fine.kernel, fine.noise.restrict(None, stride), fine.phi, fine.g, fine.h, fine.alpha)
        u = solve_mild_picard(p)
        rel.append(factorization_reconstruct(p.kernel, u, p.h, p.noise, 0.25)["relative_discrepancy"])
    passed = all(b < a for a, b in zip(rel, rel[1:])) and rel[-1] <= 5e-2
    report(10, passed, "n_steps 64..512: " + ", ".join(f"{v:.3e}" for v in rel) + " (decreasing, last <= 5e-2)")


def test_criterion_11_determinism(report, tmp_path):
    digests = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert main(["simulate", "--seed", "3", "--out", str(out)]) == 0
        digests.append({str(p.relative_to(out)): file_sha256(p) for p in sorted(out.rglob("*.csv"))})
    same = digests[0] == digests[1] and len(digests[0]) == 3
    report(11, same, f"{len(digests[0])} CSV files, byte-identical across reruns: {same}")
