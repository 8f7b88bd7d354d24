"""Command-line runner: ``fracspde {simulate,verify,holder,compare}``.

Exit codes: 0 ok, 1 configuration error, 2 a check failed, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .analysis import estimate_holder, factorization_reconstruct, holder_ensemble_summary, theoretical_holder_bound
from .config import ExperimentConfig
from .errors import ConfigError, DomainError, NumericalError
from .fbm import TimeGrid
from .fracint import OperatorPath, check_bound_i
from .greens import SpectralKernel, check_gaussian_bound, check_kernel_identities, check_lemma1, check_second_difference
from .io import write_csv, write_json, write_manifest, write_noise, write_solution
from .noise import r_alpha_H
from .solver import compare_solutions, solve_galerkin, solve_mild_picard
from .spatial import SpatialGrid

log = logging.getLogger("fracspde")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_NUMERICAL = 0, 1, 2, 3

KERNEL_TOL = {"symmetry_residual": 1e-10, "semigroup_residual": 1e-10, "mass_residual": 1e-8, "overlap_residual": 1e-8}
MILD_GALERKIN_TOL = 5e-2
FACTORIZATION_TOL = 5e-2
HOLDER_PASS_RATE = 0.9


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered map, fanned out over processes when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    cfg = cfg.with_overrides(seed=args.seed, out=args.out)
    cfg.require_hypotheses()
    return cfg


# -- simulate ----------------------------------------------------------------------------


def _simulate_one(job: tuple[ExperimentConfig, int]) -> dict[str, Any]:
    cfg, seed = job
    problem = cfg.build_problem(seed)
    out = Path(cfg.out) / f"seed_{seed}"
    files: list[Path] = list(write_noise(out, problem.noise))
    summary: dict[str, Any] = {"seed": seed}
    sols = {}
    if "mild" in cfg.solvers:
        sols["mild"] = solve_mild_picard(problem, cfg.tol, cfg.max_iter)
    if "galerkin" in cfg.solvers:
        sols["galerkin"] = solve_galerkin(problem)
    for name, u in sols.items():
        files += write_solution(out, name, u, {"config_hash": cfg.config_hash(), "seed": seed})
        summary[name] = {"norms": u.norms, "diagnostics": u.diagnostics}
    if len(sols) == 2:
        summary["comparison"] = compare_solutions(sols["mild"], sols["galerkin"])
    summary["files"] = [str(f) for f in files]
    return summary


def cmd_simulate(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    jobs = [(cfg, s) for s in cfg.ensemble_seeds()]
    results = _map(_simulate_one, jobs, args.workers)
    files = [Path(f) for r in results for f in r.pop("files")]
    write_manifest(cfg.out, cfg, cfg.ensemble_seeds(), files, {"command": "simulate", "runs": results})
    for r in results:
        line = [f"seed={r['seed']}"]
        if "mild" in r:
            line.append(f"picard_iterations={r['mild']['diagnostics']['iterations']}")
        if "comparison" in r:
            line.append(f"rel_distance={r['comparison']['relative_distance']:.3e}")
        print(" ".join(line))
    return EXIT_OK


# -- verify --------------------------------------------------------------------------------


def _verify_kernel(cfg: ExperimentConfig, args) -> dict[str, Any]:
    kernel = SpectralKernel(cfg.diffusivity, SpatialGrid(cfg.n_x), cfg.M)
    ident = check_kernel_identities(kernel, seed=cfg.seed)
    ident["passed"] = all(ident[k] < tol for k, tol in KERNEL_TOL.items())
    ident["tolerances"] = KERNEL_TOL
    gauss = check_gaussian_bound(kernel, T=cfg.T, seed=cfg.seed)
    return {"check": "kernel", "identities": ident, "gaussian_bound": gauss, "passed": ident["passed"] and gauss["passed"]}


def _bound_i_seed(job: tuple[ExperimentConfig, int, int]) -> dict[str, Any]:
    cfg, seed, n_ops = job
    noise = cfg.build_noise(seed)
    r = r_alpha_H(noise, cfg.alpha)
    rng = np.random.default_rng([cfg.seed, seed])
    grid = TimeGrid(cfg.T, cfg.n_steps)
    worst, fails = 0.0, 0
    for _ in range(n_ops):
        rep = check_bound_i(OperatorPath.random_smooth(grid, noise, rng), noise, cfg.alpha, r_alpha=r)
        worst = max(worst, rep["lhs"] / rep["rhs"])
        fails += not rep["passed"]
    return {"seed": seed, "r_alpha_H": r, "max_lhs_over_rhs": worst, "violations": fails, "n_operators": n_ops}


def _verify_bound_i(cfg: ExperimentConfig, args) -> dict[str, Any]:
    jobs = [(cfg, s, args.n_operators) for s in cfg.ensemble_seeds()]
    per_seed = _map(_bound_i_seed, jobs, args.workers)
    total = sum(p["violations"] for p in per_seed)
    n = sum(p["n_operators"] for p in per_seed)
    return {"check": "bound_i", "per_seed": per_seed, "violations": total, "n_checks": n, "pass_rate": 1.0 - total / n, "passed": total == 0}


def _verify_lemma1(cfg: ExperimentConfig, args) -> dict[str, Any]:
    kernel = SpectralKernel(cfg.diffusivity, SpatialGrid(cfg.n_x), cfg.M)
    return check_lemma1(kernel, cfg.delta, T=cfg.T, seed=cfg.seed)


def _verify_eq44(cfg: ExperimentConfig, args) -> dict[str, Any]:
    kernel = SpectralKernel(cfg.diffusivity, SpatialGrid(cfg.n_x), cfg.M)
    return check_second_difference(kernel, cfg.delta, T=cfg.T, seed=cfg.seed)


def _verify_factorization(cfg: ExperimentConfig, args) -> dict[str, Any]:
    levels = max(1, args.refine or 1)
    noise = cfg.build_noise()
    rows = []
    for level in range(levels):
        problem = cfg.build_problem(level=level, levels=levels, noise=noise)
        u = solve_mild_picard(problem, cfg.tol, cfg.max_iter)
        rows.append(factorization_reconstruct(problem.kernel, u, problem.h, problem.noise, cfg.epsilon))
    rel = [r["relative_discrepancy"] for r in rows]
    decreasing = all(b < a for a, b in zip(rel, rel[1:]))
    return {
        "check": "factorization",
        "levels": rows,
        "relative_discrepancy": rel,
        "decreasing": decreasing,
        "tolerance": FACTORIZATION_TOL,
        "passed": decreasing and rel[-1] <= FACTORIZATION_TOL,
    }


VERIFIERS = {
    "kernel": _verify_kernel,
    "bound-i": _verify_bound_i,
    "lemma1": _verify_lemma1,
    "eq44": _verify_eq44,
    "factorization": _verify_factorization,
}


def cmd_verify(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    report = VERIFIERS[args.which](cfg, args)
    report["config_hash"] = cfg.config_hash()
    path = write_json(Path(cfg.out) / f"verify_{args.which}.json", report)
    print(f"{args.which}: {'PASS' if report['passed'] else 'FAIL'} -> {path}")
    return EXIT_OK if report["passed"] else EXIT_CHECK


# -- holder ----------------------------------------------------------------------------------


def _holder_one(job: tuple[ExperimentConfig, int, float]) -> dict[str, Any]:
    cfg, seed, bound = job
    problem = cfg.build_problem(seed)
    u = solve_mild_picard(problem, cfg.tol, cfg.max_iter)
    rep = estimate_holder(u, bound=bound)
    return {"seed": seed, "report": rep, "r_alpha_H": r_alpha_H(problem.noise, cfg.alpha)}


def cmd_holder(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    bounds = theoretical_holder_bound(cfg.alpha, cfg.diffusivity.beta, cfg.d)
    key = "constant_h" if cfg.h.is_constant else "main"
    bound = bounds[key]
    results = _map(_holder_one, [(cfg, s, bound) for s in cfg.ensemble_seeds()], args.workers)
    out = Path(cfg.out)
    files = []
    rows = []
    for r in results:
        rep = r["report"]
        files.append(write_json(out / f"holder_seed_{r['seed']}.json", {"seed": r["seed"], **rep.to_dict()}))
        rows += [(r["seed"], lag, st) for lag, st in zip(rep.lags, rep.statistics)]
    files.append(write_csv(out / "holder_regression.csv", ["seed", "lag", "statistic"], rows))
    summary = holder_ensemble_summary([r["report"] for r in results], [r["r_alpha_H"] for r in results])
    summary.update({"bounds": bounds, "bound_used": key, "threshold": 0.9 * bound, "required_pass_rate": HOLDER_PASS_RATE})
    files.append(write_json(out / "holder_summary.json", summary))
    write_manifest(out, cfg, cfg.ensemble_seeds(), files, {"command": "holder"})
    rate = summary["pass_rate"]
    print(f"holder: bound={bound:.4g} ({key}) pass_rate={rate} undefined={summary['undefined']}")
    if rate is None:
        return EXIT_OK
    return EXIT_OK if rate >= HOLDER_PASS_RATE else EXIT_CHECK


# -- compare -------------------------------------------------------------------------------------


def cmd_compare(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    levels = args.refine or 3
    noise = cfg.build_noise()
    rows = []
    for level in range(levels):
        problem = cfg.build_problem(level=level, levels=levels, noise=noise)
        um = solve_mild_picard(problem, cfg.tol, cfg.max_iter)
        ug = solve_galerkin(problem)
        rep = compare_solutions(um, ug)
        rep["shape"] = list(cfg.level_shape(level, levels))
        rows.append(rep)
    rel = [r["relative_distance"] for r in rows]
    decreasing = all(b < a for a, b in zip(rel, rel[1:]))
    passed = decreasing and rel[-1] <= MILD_GALERKIN_TOL
    out = Path(cfg.out)
    files = [
        write_csv(out / "compare.csv", ["n_steps", "n_x", "N", "M", "sup_distance", "relative_distance"],
                  [r["shape"] + [r["sup_distance"], r["relative_distance"]] for r in rows]),
    ]
    files.append(write_json(out / "compare.json", {"levels": rows, "decreasing": decreasing, "tolerance": MILD_GALERKIN_TOL, "passed": passed}))
    write_manifest(out, cfg, [cfg.seed], files, {"command": "compare"})
    print("compare: relative distances " + ", ".join(f"{v:.3e}" for v in rel) + (" PASS" if passed else " FAIL"))
    return EXIT_OK if passed else EXIT_CHECK


# -- entry point ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracspde", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON configuration file")
    common.add_argument("--seed", type=int, default=None, help="override the master seed")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--refine", type=int, default=None, help="number of joint refinement levels")
    common.add_argument("--workers", type=int, default=1, help="processes for ensemble fan-out")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run the solvers and export paths")
    v = sub.add_parser("verify", parents=[common], help="run a numerical check")
    v.add_argument("which", choices=sorted(VERIFIERS))
    v.add_argument("--n-operators", type=int, default=100, help="random operator paths per seed (bound-i)")
    sub.add_parser("holder", parents=[common], help="estimate time-Hoelder exponents")
    sub.add_parser("compare", parents=[common], help="mild vs Galerkin under joint refinement")
    return parser


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "holder": cmd_holder, "compare": cmd_compare}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        write_json(Path(cfg.out) / "failure.json", {"error": str(exc), "diagnostics": exc.diagnostics})
        return EXIT_NUMERICAL
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
