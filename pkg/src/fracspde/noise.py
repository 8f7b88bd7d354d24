"""Truncated L2(D)-valued fractional Wiener process and the random constant r_alpha^H.

The noise is

    W^H(x, t) = sum_{i=1}^{N} lambda_i^{1/2} e_{i-1}(x) B_i^H(t)

with independent fBm mode paths ``B_i^H`` and the Neumann cosine basis, so
noise mode ``i`` is carried by basis function ``e_{i-1}`` (the constant
function for ``i = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .fbm import FbmPath, TimeGrid, lambda_alpha, sample_fbm_batch
from .spatial import SpectralBasis

__all__ = [
    "CovarianceSpec",
    "HypothesisReport",
    "NoiseField",
    "build_noise",
    "check_hypotheses",
    "mode_seeds",
    "r_alpha_H",
]


@dataclass(frozen=True)
class CovarianceSpec:
    """Eigenvalues of the covariance operator: ``lambda_i = c0 * i^{-p}`` or an explicit list."""

    n_modes: int
    c0: float = 1.0
    p: float = 3.0
    explicit: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise DomainError("n_modes must be positive")
        if self.explicit is not None:
            object.__setattr__(self, "explicit", tuple(float(v) for v in self.explicit))
            if len(self.explicit) < self.n_modes:
                raise DomainError("explicit spectrum shorter than n_modes")

    @property
    def lambdas(self) -> np.ndarray:
        if self.explicit is not None:
            return np.array(self.explicit[: self.n_modes])
        i = np.arange(1, self.n_modes + 1, dtype=float)
        return self.c0 * i ** (-self.p)

    def sqrt_trace_tail(self, start: int) -> float:
        """sum_{i > start} lambda_i^{1/2} for the power-law rule (inf if divergent)."""
        if self.explicit is not None:
            return float(np.sum(np.sqrt(self.lambdas[start:])))
        if self.p <= 2:
            return math.inf
        from scipy.special import zeta

        head = np.sum(np.arange(1, start + 1, dtype=float) ** (-self.p / 2))
        return float(math.sqrt(self.c0) * (zeta(self.p / 2) - head))

    def violations(self) -> list[str]:
        """Reasons why Hypothesis (C) fails for this spectrum (empty if it holds)."""
        out = []
        lam = self.lambdas
        if self.explicit is None:
            if self.c0 < 0:
                out.append(f"c0={self.c0} must be >= 0")
            if self.p <= 2:
                out.append(f"(C) needs sum lambda_i^(1/2) < inf, i.e. p > 2; got p={self.p}")
        else:
            if np.any(lam < 0):
                out.append("explicit eigenvalues must be nonnegative")
            if np.any(np.diff(lam) > 0):
                out.append("explicit eigenvalues must be nonincreasing")
        return out


def mode_seeds(master_seed: int, n_modes: int) -> list[int]:
    """Per-mode seeds from ``SeedSequence(master, spawn_key=(i,))``.

    Mode ``i`` always receives the same stream whatever ``n_modes`` is, so
    truncations at different levels share their leading modes.
    """
    return [
        int(np.random.SeedSequence(master_seed, spawn_key=(i,)).generate_state(1, np.uint64)[0] >> 1)
        for i in range(n_modes)
    ]


@dataclass(frozen=True)
class NoiseField:
    """A truncated realization of W^H: mode paths plus spectral data."""

    basis: SpectralBasis
    cov: CovarianceSpec
    grid: TimeGrid
    H: float
    seed: int
    mode_paths: np.ndarray  # (N, n_steps + 1)
    seeds: tuple[int, ...] = field(default=())
    method: str = "circulant"

    @property
    def n_modes(self) -> int:
        return self.mode_paths.shape[0]

    @property
    def sqrt_lambdas(self) -> np.ndarray:
        return np.sqrt(self.cov.lambdas[: self.n_modes])

    @property
    def spatial_modes(self) -> np.ndarray:
        """Basis functions carrying the noise modes, shape (N, n_x)."""
        return self.basis.matrix[: self.n_modes]

    def paths(self) -> list[FbmPath]:
        return [
            FbmPath(self.grid, self.H, self.mode_paths[i], self.seeds[i] if self.seeds else self.seed, self.method)
            for i in range(self.n_modes)
        ]

    def field(self, k: int | slice = slice(None)) -> np.ndarray:
        """W^H(x_j, t_k) on the spatial grid; shape (n_x,) or (n_t, n_x)."""
        weighted = self.sqrt_lambdas[:, None] * self.spatial_modes
        return self.mode_paths[:, k].T @ weighted

    def increments(self) -> np.ndarray:
        """Delta W_k(x_j) = W(x_j, t_{k+1}) - W(x_j, t_k); shape (n_steps, n_x)."""
        weighted = self.sqrt_lambdas[:, None] * self.spatial_modes
        return np.diff(self.mode_paths, axis=1).T @ weighted

    def restrict(self, n_modes: int | None = None, stride: int = 1) -> "NoiseField":
        """Keep the first ``n_modes`` modes and every ``stride``-th time point."""
        n_modes = self.n_modes if n_modes is None else n_modes
        if n_modes > self.n_modes:
            raise DomainError(f"cannot restrict {self.n_modes} modes to {n_modes}")
        cov = CovarianceSpec(n_modes, self.cov.c0, self.cov.p, self.cov.explicit)
        return NoiseField(
            self.basis,
            cov,
            self.grid.coarsen(stride),
            self.H,
            self.seed,
            self.mode_paths[:n_modes, ::stride],
            self.seeds[:n_modes],
            self.method,
        )

    def with_basis(self, basis: SpectralBasis) -> "NoiseField":
        """The same mode paths carried by a basis on another spatial grid."""
        if basis.n_modes < self.n_modes:
            raise DomainError(f"basis has {basis.n_modes} functions, noise needs {self.n_modes}")
        return NoiseField(basis, self.cov, self.grid, self.H, self.seed, self.mode_paths, self.seeds, self.method)

    def scaled(self, factor: float) -> "NoiseField":
        """Same paths with every lambda_i multiplied by ``factor``."""
        lam = tuple(factor * self.cov.lambdas)
        cov = CovarianceSpec(self.n_modes, explicit=lam)
        return NoiseField(self.basis, cov, self.grid, self.H, self.seed, self.mode_paths, self.seeds, self.method)


def build_noise(
    cov: CovarianceSpec,
    basis: SpectralBasis,
    grid: TimeGrid,
    H: float,
    seed: int,
    method: str = "circulant",
) -> NoiseField:
    """Sample N independent fBm mode paths and bundle them with (lambda_i, e_i)."""
    bad = cov.violations()
    if bad:
        raise ConfigError("Hypothesis (C) violated: " + "; ".join(bad))
    if cov.n_modes > basis.n_modes:
        raise DomainError(f"basis has {basis.n_modes} functions, noise needs {cov.n_modes}")
    seeds = mode_seeds(seed, cov.n_modes)
    paths = np.stack([sample_fbm_batch(grid, H, 1, s, method=method)[0] for s in seeds])
    return NoiseField(basis, cov, grid, H, seed, paths, tuple(seeds), method)


def r_alpha_H(noise: NoiseField, alpha: float, n_modes: int | None = None) -> float:
    """r_alpha^H = sum_i lambda_i^{1/2} Lambda_alpha(B_i^H), truncated at ``n_modes``."""
    n = noise.n_modes if n_modes is None else n_modes
    sq = noise.sqrt_lambdas[:n]
    t = noise.grid.points
    total = 0.0
    for i in range(n):
        if sq[i] == 0.0:
            continue
        total += sq[i] * lambda_alpha((t, noise.mode_paths[i]), alpha)
    return float(total)


# -- hypotheses ------------------------------------------------------------


@dataclass
class HypothesisReport:
    """Per-hypothesis pass/fail with the inequality that was checked."""

    entries: dict[str, dict[str, Any]] = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str, **extra: Any) -> None:
        self.entries[name] = {"passed": bool(passed), "detail": detail, **extra}

    def passed(self, names: Sequence[str] | None = None) -> bool:
        names = list(self.entries) if names is None else names
        return all(self.entries[n]["passed"] for n in names if n in self.entries)

    def failures(self, names: Sequence[str] | None = None) -> list[str]:
        names = list(self.entries) if names is None else names
        return [f"{n}: {self.entries[n]['detail']}" for n in names if n in self.entries and not self.entries[n]["passed"]]

    def to_dict(self) -> dict[str, Any]:
        return {"entries": self.entries, "all_passed": self.passed()}


def _get(config: Any, name: str, default: Any = None) -> Any:
    if isinstance(config, Mapping):
        return config.get(name, default)
    return getattr(config, name, default)


def check_hypotheses(config: Any) -> HypothesisReport:
    """Check the standing hypotheses against ``config`` (report only, never raises).

    ``config`` is an :class:`~fracspde.config.ExperimentConfig` or any mapping /
    object exposing ``H``, ``alpha`` and optionally ``gamma``, ``d``, ``cov``,
    ``g``, ``h``, ``phi`` and ``diffusivity``.
    """
    rep = HypothesisReport()
    H = float(_get(config, "H"))
    alpha = float(_get(config, "alpha"))
    d = int(_get(config, "d", 1))
    h = _get(config, "h")
    gamma = _get(config, "gamma")
    if gamma is None:
        gamma = getattr(h, "gamma", 1.0) if h is not None else 1.0
    gamma = float(gamma)

    cov = _get(config, "cov")
    if cov is not None:
        bad = cov.violations()
        rep.add("C", not bad, "; ".join(bad) if bad else "sum lambda_i^(1/2) < inf")

    lip_ok, lip_detail = True, []
    for name in ("g", "h"):
        fn = _get(config, name)
        if fn is None:
            continue
        ok, msg = fn.verify_lipschitz()
        lip_ok &= ok
        lip_detail.append(f"{name}: {msg}")
    if lip_detail:
        rep.add("L", lip_ok, "; ".join(lip_detail))

    phi = _get(config, "phi")
    if phi is not None:
        ok, msg = phi.check()
        rep.add("I", ok, msg)

    diff = _get(config, "diffusivity")
    if diff is not None:
        ok = diff.k_lower > 0 and math.isfinite(diff.k_upper)
        rep.add("K", ok, f"k_lower={diff.k_lower:.6g} > 0, k_upper={diff.k_upper:.6g}")

    lo_h = 1.0 / (gamma + 1.0)
    rep.add(
        "H_gamma",
        lo_h < H < 1.0,
        f"H in (1/(gamma+1), 1) = ({lo_h:.6g}, 1); got H={H}",
    )
    rep.add(
        "alpha_range",
        1.0 - H < alpha < 0.5,
        f"α ∈ (1−H, 1/2) = ({1 - H:.6g}, 0.5); got alpha={alpha}",
        interval=[1.0 - H, 0.5],
    )
    hi_a = gamma / (gamma + 1.0)
    rep.add(
        "existence_range",
        lo_h < H < 1.0 and 1.0 - H < alpha < hi_a,
        f"H > {lo_h:.6g} and alpha in (1-H, gamma/(gamma+1)) = ({1 - H:.6g}, {hi_a:.6g})",
        interval=[1.0 - H, hi_a],
    )
    lo_b = max(lo_h, (d + 1.0) / (d + 2.0))
    hi_b = min(hi_a, 1.0 / (d + 2.0))
    affine = bool(getattr(h, "is_affine", True)) if h is not None else True
    rep.add(
        "uniqueness_range",
        lo_b < H < 1.0 and 1.0 - H < alpha < hi_b and affine,
        f"H in ({lo_b:.6g}, 1), alpha in ({1 - H:.6g}, {hi_b:.6g}), h affine={affine}",
        H_interval=[lo_b, 1.0],
        interval=[1.0 - H, hi_b],
    )
    return rep
