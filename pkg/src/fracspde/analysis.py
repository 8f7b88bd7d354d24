"""Temporal Hoelder exponents of computed paths and the factorization identity.

The Hoelder estimate regresses the log of a per-lag increment statistic on
the log of the lag.  The factorization check rebuilds the stochastic
convolution C(u) from the auxiliary process

    Y_eps(tau) = sum_i lambda_i^{1/2} int_0^tau (tau - s)^{-eps} U(tau, s) [h(u(s)) e_i] B_i^H(ds)

through C(t) = sin(eps pi)/pi int_0^t (t - tau)^{eps - 1} U(t, tau) Y_eps(tau) dtau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .greens import SpectralKernel
from .noise import NoiseField
from .solver import NonlinearitySpec, SolutionPath, eval_C

__all__ = [
    "HolderReport",
    "estimate_holder",
    "factorization_prefactor",
    "factorization_reconstruct",
    "holder_ensemble_summary",
    "theoretical_holder_bound",
]


def theoretical_holder_bound(alpha: float, beta: float = 1.0, d: int = 1) -> dict[str, float]:
    """Suprema of the admissible time-Hoelder exponents.

    main:           (1/2 - alpha) ^ beta/2     general Lipschitz h
    constant_h:     beta/2                     h constant
    factorization:  (2/(d+2)) ^ beta/2         affine h, factorization route
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}")
    return {
        "main": min(0.5 - alpha, beta / 2.0),
        "constant_h": beta / 2.0,
        "factorization": min(2.0 / (d + 2.0), beta / 2.0),
    }


@dataclass
class HolderReport:
    theta: float
    r_squared: float
    lags: list[float]
    statistics: list[float]
    prefactor: float
    R_proxy: float
    statistic: str
    undefined: bool = False
    bound: float | None = None
    passed: bool | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "theta": self.theta,
            "r_squared": self.r_squared,
            "lag_range": [self.lags[0], self.lags[-1]] if self.lags else [],
            "lags": self.lags,
            "statistics": self.statistics,
            "prefactor": self.prefactor,
            "R_proxy": self.R_proxy,
            "statistic": self.statistic,
            "undefined_slope": self.undefined,
            "bound": self.bound,
            "passed": self.passed,
            **self.extra,
        }


def _lag_indices(n_steps: int, lag_min: int, lag_max: int, n_lags: int) -> np.ndarray:
    if lag_max < lag_min:
        raise DomainError(f"empty lag range [{lag_min}, {lag_max}]")
    return np.unique(np.round(np.geomspace(lag_min, lag_max, n_lags)).astype(int))


def estimate_holder(
    u: SolutionPath | tuple[np.ndarray, np.ndarray, np.ndarray | None],
    lag_min: int = 4,
    lag_max: int | None = None,
    n_lags: int = 16,
    statistic: str = "median",
    bound: float | None = None,
    pass_fraction: float = 0.9,
    norm: float | None = None,
) -> HolderReport:
    """Slope of log stat_t ||u(t + l) - u(t)||_2 against log l, lags 4 dt ... T/4 by default.

    ``u`` is a :class:`SolutionPath` or ``(times, values, weights)`` with
    ``values`` of shape (n_t + 1,) or (n_t + 1, n_x).  ``statistic`` is
    ``"median"`` or ``"max"``.  The prefactor is ``exp(intercept)``; divided by
    ``1 + norm`` (the path's alpha,2,T norm, when known) it is the empirical
    proxy for the random constant of the Hoelder bound.  When ``bound`` is
    given, ``passed`` means ``theta >= pass_fraction * bound``.
    """
    if isinstance(u, SolutionPath):
        times, values, weights = u.times, u.values, u.spatial.weights
        if norm is None and u.norms is not None:
            norm = u.norms.norm_alpha_2_T
    else:
        times, values, weights = u
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values, weights = values[:, None], np.ones(1)
    n = times.size - 1
    if n + 1 < 64:
        raise DomainError(f"need at least 64 time points, got {n + 1}")
    if statistic not in ("median", "max"):
        raise DomainError(f"statistic must be 'median' or 'max', got {statistic!r}")
    lag_max = n // 4 if lag_max is None else lag_max
    lags = _lag_indices(n, lag_min, lag_max, n_lags)
    dt = times[1] - times[0]
    reduce = np.median if statistic == "median" else np.max
    stat = np.array([reduce(np.sqrt(np.sum((values[l:] - values[:-l]) ** 2 * weights, axis=-1))) for l in lags])
    lag_t = (lags * dt).tolist()
    if np.any(stat <= 0) or not np.all(np.isfinite(stat)):
        return HolderReport(math.nan, math.nan, lag_t, stat.tolist(), math.nan, math.nan, statistic, True, bound, None)
    fit = stats.linregress(np.log(lags * dt), np.log(stat))
    theta = float(fit.slope)
    pref = float(math.exp(fit.intercept))
    proxy = pref / (1.0 + norm) if norm is not None else pref
    passed = None if bound is None else bool(theta >= pass_fraction * bound)
    return HolderReport(theta, float(fit.rvalue**2), lag_t, stat.tolist(), pref, proxy, statistic, False, bound, passed)


def holder_ensemble_summary(reports: Sequence[HolderReport], r_alpha: Sequence[float] | None = None) -> dict[str, Any]:
    """Pass rate over an ensemble and, optionally, the rank correlation of R_proxy with r_alpha^H."""
    thetas = [r.theta for r in reports]
    flags = [bool(r.passed) for r in reports if r.passed is not None]
    out: dict[str, Any] = {
        "n": len(reports),
        "thetas": thetas,
        "pass_rate": float(np.mean(flags)) if flags else None,
        "undefined": sum(r.undefined for r in reports),
    }
    if r_alpha is not None and len(r_alpha) == len(reports) and len(reports) > 2:
        rho = stats.spearmanr([r.R_proxy for r in reports], list(r_alpha)).statistic
        out["rank_correlation_R_proxy_r_alpha"] = float(rho)  # diagnostic only
    return out


# -- factorization -------------------------------------------------------------------


def factorization_prefactor(epsilon: float) -> float:
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    return math.sin(epsilon * math.pi) / math.pi


def factorization_reconstruct(
    kernel: SpectralKernel,
    u: SolutionPath,
    h: NonlinearitySpec,
    noise: NoiseField,
    epsilon: float = 0.25,
) -> dict[str, Any]:
    """Rebuild C(u) from Y_eps and report sup_t ||C_hat - C(u)||_2 / sup_t ||C(u)||_2.

    Y_eps is evaluated at the interval midpoints tau_m = t_m + dt/2 with
    left-point Young sums over the increments up to t_{m+1}.  The outer
    integral over [t_m, t_{m+1}] uses U(t, tau_m) Y_eps(tau_m) against the
    exact integral of (t - tau)^{eps - 1}.
    """
    c_eps = factorization_prefactor(epsilon)
    grid = noise.grid
    n, dt = grid.n_steps, grid.dt
    t = grid.points
    mu = kernel.eigenvalues
    K = kernel.diffusivity.cumulative(t)
    tau = t[:-1] + 0.5 * dt
    Ktau = kernel.diffusivity.cumulative(tau)

    C = eval_C(kernel, u.values, h, noise)
    if h.kind == "zero":
        src = np.zeros((n, kernel.n_modes))
    else:
        src = kernel.basis.project(h(u.values[:-1]) * noise.increments())  # f_j Delta W_j, (n, M)

    Y = np.zeros((n, kernel.n_modes))
    for m in range(n):
        lag = tau[m] - t[: m + 1]
        decay = np.exp(-np.multiply.outer(Ktau[m] - K[: m + 1], mu))
        Y[m] = np.sum((lag ** -epsilon)[:, None] * decay * src[: m + 1], axis=0)

    C_hat = np.zeros_like(C)
    for k in range(1, n + 1):
        hi = t[k] - t[:k]
        lo = t[k] - t[1 : k + 1]
        w = (hi**epsilon - lo**epsilon) / epsilon  # int_{t_m}^{t_{m+1}} (t_k - tau)^{eps - 1} dtau
        decay = np.exp(-np.multiply.outer(K[k] - Ktau[:k], mu))
        C_hat[k] = c_eps * np.sum(w[:, None] * decay * Y[:k], axis=0)

    c_vals = kernel.basis.synthesize(C)
    diff = kernel.grid.norm(kernel.basis.synthesize(C_hat) - c_vals)
    scale = float(np.max(kernel.grid.norm(c_vals)))
    sup = float(np.max(diff))
    return {
        "check": "factorization",
        "epsilon": epsilon,
        "prefactor": c_eps,
        "n_steps": n,
        "sup_discrepancy": sup,
        "sup_norm_C": scale,
        "relative_discrepancy": sup / scale if scale > 0 else 0.0,
    }
