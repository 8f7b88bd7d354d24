"""Neumann Green's function of d/dt - k0 kappa(t) d^2/dx^2 on D = (0, 1).

For a separable diffusivity ``k(x, t) = k0 * kappa(t)`` the kernel depends on
time only through ``K(t) - K(s)`` with ``K(t) = int_0^t k0 kappa``:

    G(x, t; y, s) = sum_m exp(-(m pi)^2 (K(t) - K(s))) e_m(x) e_m(y)
                  = sum_n [phi(x - y + 2n) + phi(x + y + 2n)],

``phi`` being the free heat kernel with variance ``2 (K(t) - K(s))``.  The
spectral sum is used for large gaps and the image sum for small ones.

The ``check_*`` functions instantiate the kernel estimates with unit constant
in front and ``c' = 1 / (8 k_upper)`` in the Gaussian exponent, then report how
the largest left/right ratio behaves under grid refinement.  Estimates whose
proof passes through ``|dG/dt|^delta`` carry ``delta * c'`` in the exponent,
because raising the Gaussian bound to the power delta scales its exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .spatial import SpatialGrid, SpectralBasis

__all__ = [
    "DiffusivitySpec",
    "SpectralKernel",
    "apply_U",
    "check_gaussian_bound",
    "check_kernel_identities",
    "check_lemma1",
    "check_second_difference",
    "green_eval",
]


@dataclass(frozen=True)
class DiffusivitySpec:
    """``k(t) = k0 * kappa(t)``.

    ``kind`` selects kappa: ``"constant"`` (kappa = 1), ``"sine"``
    (``1 + amp sin(2 pi freq t)``, ``|amp| < 1``) or ``"table"`` (piecewise
    linear through ``table = ((t0, v0), (t1, v1), ...)``, held constant outside).
    """

    k0: float = 1.0
    kind: str = "constant"
    amp: float = 0.0
    freq: float = 1.0
    table: tuple[tuple[float, float], ...] = field(default=())
    beta: float = 1.0
    beta_prime: float = 1.0

    def __post_init__(self) -> None:
        if not self.k0 > 0:
            raise DomainError(f"k0 must be positive, got {self.k0}")
        if self.kind == "sine" and not abs(self.amp) < 1:
            raise DomainError(f"sine profile needs |amp| < 1, got {self.amp}")
        if self.kind == "table":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
                raise DomainError("table must be a sequence of (t, kappa) pairs")
            if np.any(np.diff(tab[:, 0]) <= 0) or np.any(tab[:, 1] <= 0):
                raise DomainError("table times must increase and kappa values be positive")
        elif self.kind not in ("constant", "sine"):
            raise DomainError(f"unknown diffusivity kind {self.kind!r}")

    def kappa(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.ones_like(t)
        if self.kind == "sine":
            return 1.0 + self.amp * np.sin(2 * np.pi * self.freq * t)
        tab = np.asarray(self.table)
        return np.interp(t, tab[:, 0], tab[:, 1])

    def cumulative(self, t):
        """K(t) = int_0^t k0 kappa(r) dr (exact for every profile)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return self.k0 * t
        if self.kind == "sine":
            w = 2 * np.pi * self.freq
            return self.k0 * (t + self.amp * (1.0 - np.cos(w * t)) / w)
        return self.k0 * _table_integral(np.asarray(self.table, dtype=float), t)

    @property
    def k_lower(self) -> float:
        if self.kind == "sine":
            return self.k0 * (1 - abs(self.amp))
        if self.kind == "table":
            return self.k0 * float(np.min(np.asarray(self.table)[:, 1]))
        return self.k0

    @property
    def k_upper(self) -> float:
        if self.kind == "sine":
            return self.k0 * (1 + abs(self.amp))
        if self.kind == "table":
            return self.k0 * float(np.max(np.asarray(self.table)[:, 1]))
        return self.k0


def _table_integral(tab: np.ndarray, t: np.ndarray) -> np.ndarray:
    """int_0^t of the piecewise-linear profile through ``tab`` (constant beyond the ends)."""
    nodes = np.unique(np.concatenate([[0.0], tab[:, 0]]))
    vals = np.interp(nodes, tab[:, 0], tab[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes))])

    def F(r):
        j = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, nodes.size - 2)
        h = np.minimum(r, nodes[-1]) - nodes[j]
        slope = (vals[j + 1] - vals[j]) / (nodes[j + 1] - nodes[j])
        inside = cum[j] + vals[j] * h + 0.5 * slope * h * h
        return inside + vals[-1] * np.maximum(r - nodes[-1], 0.0)

    return F(t) - F(np.zeros_like(t))


def _switch_gap(n_modes: int, tol: float = 1e-12) -> float:
    """Smallest gap where the omitted spectral tail 2 sum_{m >= M} e^{-(m pi)^2 gap} is below ``tol``."""

    def log_tail(gap: float) -> float:
        return math.log(2.0) - (n_modes * math.pi) ** 2 * gap - math.log(-math.expm1(-(2 * n_modes + 1) * math.pi**2 * gap))

    hi = 1.0
    while log_tail(hi) > math.log(tol):
        hi *= 2
    return brentq(lambda g: log_tail(g) - math.log(tol), 1e-12, hi, xtol=1e-16)


class SpectralKernel:
    """Green's function and evolution operators U(t, s) for one diffusivity.

    ``n_modes`` eigenpairs are kept (``M``, default 256).  Grid functions are
    represented on ``grid``; ``U(t, s)`` maps them through the first
    ``n_modes`` cosine coefficients.
    """

    def __init__(self, diffusivity: DiffusivitySpec, grid: SpatialGrid, n_modes: int = 256):
        self.diffusivity = diffusivity
        self.grid = grid
        self.n_modes = n_modes
        self.basis = SpectralBasis(grid, n_modes)
        self.eigenvalues = (np.pi * np.arange(n_modes)) ** 2
        self.tau_switch = _switch_gap(n_modes)

    @property
    def k_upper(self) -> float:
        return self.diffusivity.k_upper

    def gap(self, t, s):
        return self.diffusivity.cumulative(t) - self.diffusivity.cumulative(s)

    # -- pointwise kernel ------------------------------------------------

    def spectral(self, x, y, gap) -> np.ndarray:
        x, y, gap = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, gap)))
        m = np.arange(1, self.n_modes)
        decay = np.exp(-np.multiply.outer(gap, self.eigenvalues[1:]))
        terms = decay * np.cos(np.multiply.outer(x, m) * np.pi) * np.cos(np.multiply.outer(y, m) * np.pi)
        return 1.0 + 2.0 * terms.sum(axis=-1)

    @staticmethod
    def images(x, y, gap) -> np.ndarray:
        x, y, gap = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, gap)))
        if gap.size == 0:
            return np.zeros_like(gap)
        n_max = int(math.ceil(math.sqrt(160.0 * float(np.max(gap))) / 2.0)) + 1
        n = np.arange(-n_max, n_max + 1)
        four_g = 4.0 * gap[..., None]
        d1 = (x - y)[..., None] + 2.0 * n
        d2 = (x + y)[..., None] + 2.0 * n
        s = np.exp(-(d1 * d1) / four_g) + np.exp(-(d2 * d2) / four_g)
        return s.sum(axis=-1) / np.sqrt(np.pi * four_g[..., 0])

    def from_gap(self, x, y, gap) -> np.ndarray:
        x, y, gap = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, gap)))
        out = np.empty(gap.shape)
        small = gap < self.tau_switch
        if np.any(small):
            out[small] = self.images(x[small], y[small], gap[small])
        if np.any(~small):
            out[~small] = self.spectral(x[~small], y[~small], gap[~small])
            # the cosine series is only absolutely accurate; tiny values come from
            # the positive image series, which is accurate relative to its size
            tiny = ~small & (np.abs(out) < 1e-8)
            if np.any(tiny):
                out[tiny] = self.images(x[tiny], y[tiny], gap[tiny])
        return out

    def __call__(self, x, t, y, s):
        return green_eval(self, x, t, y, s)

    # -- operators -------------------------------------------------------

    def multipliers(self, t, s) -> np.ndarray:
        """exp(-mu_m (K(t) - K(s))) for every kept mode; shape (..., n_modes)."""
        return np.exp(-np.multiply.outer(np.asarray(self.gap(t, s), dtype=float), self.eigenvalues))

    def step_multipliers(self, times: np.ndarray) -> np.ndarray:
        """Per-step mode multipliers for consecutive times; shape (len(times) - 1, n_modes)."""
        K = self.diffusivity.cumulative(times)
        return np.exp(-np.multiply.outer(np.diff(K), self.eigenvalues))


def green_eval(kernel: SpectralKernel, x, t, y, s):
    """G(x, t; y, s) for t > s (broadcasting over all arguments)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t <= s):
        raise DomainError("Green's function is defined only for t > s")
    out = kernel.from_gap(x, y, kernel.gap(t, s))
    return float(out) if out.ndim == 0 else out


def apply_U(kernel: SpectralKernel, v, t: float, s: float) -> np.ndarray:
    """U(t, s) v = int_D G(., t; y, s) v(y) dy, with U(t, t) = identity.

    ``v`` holds grid values along its last axis.
    """
    if t < s:
        raise DomainError(f"U(t, s) needs t >= s, got t={t}, s={s}")
    v = np.asarray(v, dtype=float)
    if t == s:
        return v.copy()
    coeffs = kernel.basis.project(v) * kernel.multipliers(t, s)
    return kernel.basis.synthesize(coeffs)


# -- kernel identity report ------------------------------------------------


def check_kernel_identities(kernel: SpectralKernel, seed: int = 0, n_samples: int = 2000) -> dict:
    """Symmetry, semigroup, self-adjointness, mass conservation and representation overlap."""
    rng = np.random.default_rng(seed)
    T = 1.0
    x = rng.uniform(0, 1, n_samples)
    y = rng.uniform(0, 1, n_samples)
    s = rng.uniform(0, T / 2, n_samples)
    t = s + 10 ** rng.uniform(-6, np.log10(T / 2), n_samples)
    G_xy = green_eval(kernel, x, t, y, s)
    G_yx = green_eval(kernel, y, t, x, s)
    symmetry = float(np.max(np.abs(G_xy - G_yx) / np.maximum(1.0, np.abs(G_xy))))

    xg = kernel.grid.x
    v = np.exp(np.cos(3 * np.pi * xg)) + xg**2 * (1 - xg) ** 2
    w = np.sin(2.5 * xg) + 0.3
    semigroup = 0.0
    selfadj = 0.0
    for sig, tau, tt in [(0.0, 0.1, 0.3), (0.05, 0.0501, 0.06), (0.2, 0.7, 1.0), (0.0, 1e-5, 2e-5)]:
        lhs = apply_U(kernel, apply_U(kernel, v, tau, sig), tt, tau)
        rhs = apply_U(kernel, v, tt, sig)
        semigroup = max(semigroup, float(kernel.grid.norm(lhs - rhs) / kernel.grid.norm(rhs)))
        a = kernel.grid.inner(apply_U(kernel, v, tt, sig), w)
        b = kernel.grid.inner(v, apply_U(kernel, w, tt, sig))
        selfadj = max(selfadj, abs(a - b) / max(1.0, abs(a)))

    yq = np.linspace(0.0, 1.0, 40001)
    wq = np.full(yq.size, yq[1] - yq[0])
    wq[[0, -1]] *= 0.5
    mass = 0.0
    for xi, gap in [(0.0, 1e-5), (0.3, 1e-4), (0.5, 1e-3), (0.9, 0.05), (1.0, 0.5), (0.77, 3.0)]:
        gvals = kernel.from_gap(xi, yq, gap)
        mass = max(mass, abs(float(np.sum(wq * gvals)) - 1.0))

    gaps = kernel.tau_switch * np.array([1.0, 1.5, 2.0, 4.0, 10.0, 100.0])
    xs = np.linspace(0, 1, 21)
    X, Y, Gp = np.meshgrid(xs, xs, gaps, indexing="ij")
    spec = kernel.spectral(X, Y, Gp)
    imgs = kernel.images(X, Y, Gp)
    overlap = float(np.max(np.abs(spec - imgs) / np.maximum(1.0, np.abs(imgs))))
    return {
        "symmetry_residual": symmetry,
        "semigroup_residual": semigroup,
        "self_adjoint_residual": float(selfadj),
        "mass_residual": mass,
        "overlap_residual": overlap,
        "tau_switch": kernel.tau_switch,
        "orthonormality_residual": kernel.basis.orthonormality_residual(),
    }


# -- Gaussian bound ---------------------------------------------------------


def _heat_factor(r2, u, cprime):
    return u ** (-0.5) * np.exp(-cprime * r2 / u)


def _best_heat_factor(r2, lo, hi, cprime, interior: str):
    """Heat factor u^{-1/2} exp(-c' r^2 / u) at the interior point.

    ``"optimal"`` maximizes over u in [lo, hi] (attained at clip(2 c' r^2));
    ``"midpoint"`` uses u = (lo + hi) / 2.
    """
    if interior == "midpoint":
        u = 0.5 * (lo + hi)
    elif interior == "optimal":
        u = np.clip(2.0 * cprime * r2, lo, hi)
    else:
        raise DomainError(f"unknown interior-point rule {interior!r}")
    return _heat_factor(r2, u, cprime)


def _envelope_ratio(G, dx, dt, cprime):
    """|G| / ((dt)^{-1/2} exp(-c' dx^2 / dt)), computed in log form (0 where G underflows)."""
    absG = np.abs(G)
    with np.errstate(divide="ignore"):
        log_r = np.log(absG) + 0.5 * np.log(dt) + cprime * dx * dx / dt
    return np.where(absG > 0, np.exp(log_r), 0.0)


def _gaussian_samples(kernel, n_space, n_gaps, gap_min, T, rng):
    xs = np.linspace(0.0, 1.0, n_space)
    gaps = np.geomspace(gap_min, T, n_gaps)
    X, Y, D = (a.ravel() for a in np.meshgrid(xs, xs, gaps, indexing="ij"))
    S = rng.uniform(0.0, T - D)
    return X, Y, S + D, S


def check_gaussian_bound(
    kernel: SpectralKernel,
    T: float = 1.0,
    n_space: int = 17,
    n_gaps: int = 24,
    gap_min: float = 1e-4,
    seed: int = 0,
) -> dict:
    """Fit the smallest c with |G| <= c (t-s)^{-d/2} exp(-c' |x-y|^2 / (t-s)), d = 1.

    ``c'`` is fixed at ``1 / (8 k_upper)``.  The fit is repeated with ``n_space``
    and ``n_gaps`` doubled; the relative drift of ``c`` is reported together
    with the violation count of the bound with ``k_upper`` doubled in ``c'``.
    """
    rng = np.random.default_rng(seed)
    cprime = 1.0 / (8.0 * kernel.k_upper)
    fits = []
    for level in range(2):
        X, Y, t, s = _gaussian_samples(kernel, (n_space - 1) * 2**level + 1, n_gaps * 2**level, gap_min, T, rng)
        G = green_eval(kernel, X, t, Y, s)
        c = float(np.max(_envelope_ratio(G, X - Y, t - s, cprime)))
        looser = _envelope_ratio(G, X - Y, t - s, 0.5 * cprime)
        fits.append({"c": c, "n_samples": int(X.size), "violations_looser": int(np.sum(looser > c * (1 + 1e-12)))})
    drift = abs(fits[1]["c"] - fits[0]["c"]) / fits[0]["c"]
    return {
        "check": "gaussian_bound",
        "d": 1,
        "cprime": cprime,
        "levels": fits,
        "c": fits[-1]["c"],
        "drift": drift,
        "violations_looser": fits[-1]["violations_looser"],
        "passed": bool(np.isfinite(fits[-1]["c"]) and drift < 0.05 and fits[-1]["violations_looser"] == 0),
    }


# -- increment estimates and the second difference ------------------------------

INCREMENT_PARTS = ("sigma_increment", "t_increment", "t_increment_power", "sigma_increment_power")


def _check_delta(delta: float, d: int = 1) -> None:
    if not d / (d + 2) < delta < 1:
        raise DomainError(f"delta must lie in (d/(d+2), 1) = ({d / (d + 2):.4g}, 1), got {delta}")


def _refinement_tuples(rng, n_t: int, T: float, n: int, levels: int = 2):
    """Shared random tuples t > s > tau > sigma snapped to successively refined grids.

    The same continuous draws (and the same x, y) are rounded to the grid with
    ``n_t * 2**level`` intervals, so the levels differ only through the grid.
    Draws whose snapping produces a tie on any level are discarded.
    """
    u = np.sort(rng.uniform(0.0, T, size=(n * 2, 4)), axis=1)[:, ::-1]
    x = rng.uniform(0.0, 1.0, n * 2)
    y = rng.uniform(0.0, 1.0, n * 2)
    distinct = np.ones(u.shape[0], dtype=bool)
    for level in range(levels):
        nodes = np.round(u * n_t * 2**level / T)
        distinct &= np.all(np.diff(nodes, axis=1) < 0, axis=1)
    keep = np.flatnonzero(distinct)[:n]
    out = []
    for level in range(levels):
        m = n_t * 2**level
        snapped = np.round(u[keep] * m / T) * (T / m)
        out.append((snapped.T, x[keep], y[keep]))
    return out


def _increment_ratios(kernel, parts, delta, x, y, t, s, tau, sigma, cprime, interior):
    r2 = (x - y) ** 2
    G = kernel.from_gap
    gap = kernel.gap
    out = {}
    if "sigma_increment" in parts or "sigma_increment_power" in parts:
        d_sig = np.abs(G(x, y, gap(t, tau)) - G(x, y, gap(t, sigma)))
    if "t_increment" in parts or "t_increment_power" in parts:
        d_t = np.abs(G(x, y, gap(t, tau)) - G(x, y, gap(s, tau)))
    if "sigma_increment" in parts:
        heat = _best_heat_factor(r2, t - tau, t - sigma, cprime, interior)
        rhs = (t - tau) ** -delta * (tau - sigma) ** delta * heat
        out["sigma_increment"] = d_sig / rhs
    if "t_increment" in parts:
        heat = _best_heat_factor(r2, s - tau, t - tau, cprime, interior)
        rhs = (t - s) ** delta * (s - tau) ** -delta * heat
        out["t_increment"] = d_t / rhs
    if "t_increment_power" in parts:
        heat = _best_heat_factor(r2, s - tau, t - tau, cprime, interior)
        rhs = (t - s) ** delta * (s - tau) ** (-1.5 * delta + 0.5) * heat
        out["t_increment_power"] = d_t**delta / rhs
    if "sigma_increment_power" in parts:
        rhs = (tau - sigma) ** (1 - delta) * (s - tau) ** (-1.5 * (1 - delta))
        out["sigma_increment_power"] = d_sig ** (1 - delta) / rhs
    return out


def _slope(eps, vals) -> float:
    ok = vals > 0
    if ok.sum() < 3:
        return float("nan")
    return float(np.polyfit(np.log(eps[ok]), np.log(vals[ok]), 1)[0])


def _increment_slopes(kernel, delta) -> dict:
    """Log-log slopes of the left-hand sides as the relevant increment shrinks."""
    eps = np.geomspace(1e-4, 1e-2, 9)
    configs = [(0.3, 0.35, 0.4, 0.3, 0.2), (0.1, 0.6, 0.8, 0.5, 0.3), (0.5, 0.5, 0.9, 0.6, 0.45)]
    G = kernel.from_gap
    gap = kernel.gap
    res = {k: [] for k in ("sigma_increment", "t_increment", "t_increment_power", "sigma_increment_power", "second_t", "second_tau")}
    for x, y, t, s, tau in configs:
        sigma = tau - eps
        d_sig = np.abs(G(x, y, gap(t, tau)) - G(x, y, gap(t, sigma)))
        res["sigma_increment"].append(_slope(eps, d_sig))
        res["sigma_increment_power"].append(_slope(eps, d_sig ** (1 - delta)))
        tt = s + eps
        d_t = np.abs(G(x, y, gap(tt, tau)) - G(x, y, gap(s, tau)))
        res["t_increment"].append(_slope(eps, d_t))
        res["t_increment_power"].append(_slope(eps, d_t**delta))
        sig_fixed = tau - 0.1
        d2_t = np.abs(
            G(x, y, gap(tt, tau)) - G(x, y, gap(s, tau)) - G(x, y, gap(tt, sig_fixed)) + G(x, y, gap(s, sig_fixed))
        )
        res["second_t"].append(_slope(eps, d2_t))
        t_fixed = s + 0.1
        d2_tau = np.abs(
            G(x, y, gap(t_fixed, tau)) - G(x, y, gap(s, tau)) - G(x, y, gap(t_fixed, sigma)) + G(x, y, gap(s, sigma))
        )
        res["second_tau"].append(_slope(eps, d2_tau))
    return {k: float(np.median(v)) for k, v in res.items()}


def check_lemma1(
    kernel: SpectralKernel,
    delta: float,
    n_tuples: int = 10_000,
    n_t: int = 64,
    T: float = 1.0,
    seed: int = 0,
    interior: str = "midpoint",
    drift_tol: float = 0.10,
    slope_tol: float = 0.05,
) -> dict:
    """Witness the four kernel increment estimates on random node tuples.

    Each estimate's right side is evaluated with unit constant; the maximum
    of LHS/RHS over ``n_tuples`` samples is computed on a time grid with
    ``n_t`` intervals and again with ``2 n_t``.  Slopes of the left sides as
    the relevant increment shrinks are reported alongside: for (14), (15)
    the increment rate must be at least ``delta - slope_tol``; for the powered
    forms (16) and (17) the slope must equal ``delta`` resp. ``1 - delta``
    within ``slope_tol``.
    """
    _check_delta(delta)
    cprime = delta / (8.0 * kernel.k_upper)
    rng = np.random.default_rng(seed)
    levels = []
    for (t, s, tau, sigma), x, y in _refinement_tuples(rng, n_t, T, n_tuples):
        ratios = _increment_ratios(kernel, INCREMENT_PARTS, delta, x, y, t, s, tau, sigma, cprime, interior)
        levels.append({k: float(np.max(v)) for k, v in ratios.items()})
    slopes = _increment_slopes(kernel, delta)
    parts = {}
    for k in INCREMENT_PARTS:
        a, b = levels[0][k], levels[1][k]
        drift = abs(b - a) / a
        if k in ("sigma_increment", "t_increment"):
            slope_ok = slopes[k] >= delta - slope_tol
        elif k == "t_increment_power":
            slope_ok = abs(slopes[k] - delta) <= slope_tol
        else:
            slope_ok = abs(slopes[k] - (1 - delta)) <= slope_tol
        parts[k] = {
            "max_ratio": [a, b],
            "drift": drift,
            "slope": slopes[k],
            "passed": bool(np.isfinite(b) and drift < drift_tol and slope_ok),
        }
    return {
        "check": "lemma1",
        "delta": delta,
        "cprime": cprime,
        "interior": interior,
        "n_tuples": n_tuples,
        "n_t": [n_t, 2 * n_t],
        "parts": parts,
        "passed": all(p["passed"] for p in parts.values()),
    }


def second_difference(kernel, x, y, t, s, tau, sigma):
    """G(x,t;y,tau) - G(x,s;y,tau) - G(x,t;y,sigma) + G(x,s;y,sigma), for t >= s > tau >= sigma."""
    t, s, tau, sigma = (np.asarray(v, dtype=float) for v in (t, s, tau, sigma))
    if np.any(t < s) or np.any(s <= tau) or np.any(tau < sigma):
        raise DomainError("second difference needs t >= s > tau >= sigma")
    G = kernel.from_gap
    gap = kernel.gap
    return G(x, y, gap(t, tau)) - G(x, y, gap(s, tau)) - G(x, y, gap(t, sigma)) + G(x, y, gap(s, sigma))


def check_second_difference(
    kernel: SpectralKernel,
    delta: float,
    n_tuples: int = 10_000,
    n_t: int = 64,
    T: float = 1.0,
    seed: int = 1,
    interior: str = "midpoint",
    drift_tol: float = 0.10,
    slope_tol: float = 0.05,
) -> dict:
    """Witness the mixed time-increment estimate

        |second difference| <= c (t-s)^delta (s-tau)^{-1} (tau-sigma)^{1-delta}
                                 * (heat(tau* - tau) + heat(sigma* - sigma)),

    tau*, sigma* in (s, t), on random ordered tuples t > s > tau > sigma.
    """
    _check_delta(delta)
    cprime = delta / (8.0 * kernel.k_upper)
    rng = np.random.default_rng(seed)
    maxima = []
    for (t, s, tau, sigma), x, y in _refinement_tuples(rng, n_t, T, n_tuples):
        r2 = (x - y) ** 2
        lhs = np.abs(second_difference(kernel, x, y, t, s, tau, sigma))
        heat = _best_heat_factor(r2, s - tau, t - tau, cprime, interior) + _best_heat_factor(
            r2, s - sigma, t - sigma, cprime, interior
        )
        rhs = (t - s) ** delta / (s - tau) * (tau - sigma) ** (1 - delta) * heat
        maxima.append(float(np.max(lhs / rhs)))
    slopes = _increment_slopes(kernel, delta)
    drift = abs(maxima[1] - maxima[0]) / maxima[0]
    slope_ok = slopes["second_t"] >= delta - slope_tol and slopes["second_tau"] >= (1 - delta) - slope_tol
    return {
        "check": "second_difference",
        "delta": delta,
        "cprime": cprime,
        "interior": interior,
        "n_tuples": n_tuples,
        "n_t": [n_t, 2 * n_t],
        "max_ratio": maxima,
        "drift": drift,
        "slope_t": slopes["second_t"],
        "slope_tau": slopes["second_tau"],
        "passed": bool(np.isfinite(maxima[1]) and drift < drift_tol and slope_ok),
    }
