"""Mild (Picard) and variational (spectral Galerkin) solvers for

    du = [div(k(t) grad u) + g(u)] dt + h(u) W^H(dt)   on (0, 1), zero flux,
    u(x, 0) = phi(x).

Everything is carried in the coefficients of the Neumann cosine basis of the
kernel.  The mild terms are

    A(phi)(t) = U(t, 0) phi,
    B(u)(t)   = int_0^t U(t, tau) g(u(tau)) dtau,
    C(u)(t)   = sum_i lambda_i^{1/2} int_0^t U(t, tau) [h(u(tau)) e_i] B_i^H(dtau),

discretized with left-point sums in tau and the exact mode multipliers for U,
which turns both integrals into one-step recurrences.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, NumericalError
from .fbm import TimeGrid
from .fracint import AlphaNorms, alpha_norms, norm_alpha_2_T
from .greens import SpectralKernel
from .noise import NoiseField
from .spatial import GridFunction, SpatialGrid

__all__ = [
    "InitialCondition",
    "NonlinearitySpec",
    "Problem",
    "SolutionPath",
    "compare_solutions",
    "eval_A",
    "eval_B",
    "eval_C",
    "mild_residual",
    "solve_galerkin",
    "solve_mild_picard",
]

log = logging.getLogger(__name__)

_KINDS = ("zero", "constant", "affine", "sine", "clipped_poly")


@dataclass(frozen=True)
class NonlinearitySpec:
    """A scalar Lipschitz function of closed form.

    kinds:
      zero          0
      constant      a
      affine        a + b u
      sine          a + b sin(c u)
      clipped_poly  sum_k coeffs[k] v^k with v = clip(u, -clip, clip)

    ``gamma`` is the Hoelder exponent of the derivative.  It is 1 for the
    smooth kinds; a clipped polynomial has a kinked derivative and reports 0
    unless a value is declared.
    """

    kind: str = "zero"
    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    coeffs: tuple[float, ...] = ()
    clip: float = 1.0
    declared_gamma: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in self.coeffs))
        if self.kind == "clipped_poly" and not self.clip > 0:
            raise DomainError("clip radius must be positive")

    @classmethod
    def zero(cls) -> "NonlinearitySpec":
        return cls("zero")

    @classmethod
    def constant(cls, a: float) -> "NonlinearitySpec":
        return cls("constant", a=a)

    @classmethod
    def affine(cls, a: float, b: float) -> "NonlinearitySpec":
        return cls("affine", a=a, b=b)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NonlinearitySpec":
        d = dict(d)
        if "gamma" in d:
            d["declared_gamma"] = d.pop("gamma")
        if "coeffs" in d:
            d["coeffs"] = tuple(d["coeffs"])
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "coeffs": list(self.coeffs),
            "clip": self.clip,
            "gamma": self.gamma,
        }

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(u)
        if self.kind == "constant":
            return np.full_like(u, self.a)
        if self.kind == "affine":
            return self.a + self.b * u
        if self.kind == "sine":
            return self.a + self.b * np.sin(self.c * u)
        return np.polynomial.polynomial.polyval(np.clip(u, -self.clip, self.clip), self.coeffs)

    @property
    def lipschitz(self) -> float:
        if self.kind in ("zero", "constant"):
            return 0.0
        if self.kind == "affine":
            return abs(self.b)
        if self.kind == "sine":
            return abs(self.b * self.c)
        deriv = np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else np.zeros(1)
        v = np.linspace(-self.clip, self.clip, 4001)
        crit = np.polynomial.polynomial.polyroots(deriv) if len(deriv) > 1 else np.array([])
        crit = np.real(crit[np.isreal(crit)])
        v = np.concatenate([v, crit[np.abs(crit) <= self.clip]])
        return float(np.max(np.abs(np.polynomial.polynomial.polyval(v, deriv))))

    @property
    def gamma(self) -> float:
        if self.declared_gamma is not None:
            return float(self.declared_gamma)
        return 0.0 if self.kind == "clipped_poly" else 1.0

    @property
    def is_affine(self) -> bool:
        return self.kind in ("zero", "constant", "affine")

    @property
    def is_constant(self) -> bool:
        return self.kind in ("zero", "constant")

    def verify_lipschitz(self, radius: float = 10.0, n: int = 4001) -> tuple[bool, str]:
        """Check the declared constant against difference quotients on a sample grid."""
        u = np.linspace(-radius, radius, n)
        f = self(u)
        q = float(np.max(np.abs(np.diff(f)) / np.diff(u)))
        L = self.lipschitz
        ok = q <= L * (1.0 + 1e-9) + 1e-12
        return ok, f"{self.kind}: observed {q:.6g} <= declared L={L:.6g}"


@dataclass(frozen=True)
class InitialCondition:
    """phi as a cosine series ``sum_m coeffs[m] e_m``, a constant, or explicit grid values."""

    kind: str = "cosine"
    coeffs: tuple[float, ...] = (1.0,)
    value: float = 0.0
    grid_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("cosine", "constant", "values"):
            raise DomainError(f"unknown initial condition kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in self.coeffs))
        object.__setattr__(self, "grid_values", tuple(float(v) for v in self.grid_values))

    @classmethod
    def constant(cls, value: float) -> "InitialCondition":
        return cls("constant", value=value)

    @classmethod
    def mode(cls, m: int, amplitude: float = 1.0) -> "InitialCondition":
        c = [0.0] * (m + 1)
        c[m] = amplitude
        return cls("cosine", coeffs=tuple(c))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InitialCondition":
        d = dict(d)
        for key in ("coeffs", "grid_values"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "coeffs": list(self.coeffs), "value": self.value, "grid_values": list(self.grid_values)}

    @property
    def smooth(self) -> bool:
        """Cosine series and constants are smooth with zero boundary flux."""
        return self.kind in ("cosine", "constant")

    def values(self, grid: SpatialGrid) -> np.ndarray:
        if self.kind == "constant":
            return np.full(grid.n_x, float(self.value))
        if self.kind == "values":
            v = np.asarray(self.grid_values)
            if v.size != grid.n_x:
                raise DomainError(f"phi has {v.size} values, grid has {grid.n_x} nodes")
            return v.copy()
        m = np.arange(len(self.coeffs))
        E = np.sqrt(2.0) * np.cos(np.pi * m[:, None] * grid.x[None, :])
        E[0] = 1.0
        return np.asarray(self.coeffs) @ E

    def check(self) -> tuple[bool, str]:
        if self.kind == "values":
            v = np.asarray(self.grid_values)
            ok = v.size > 0 and bool(np.all(np.isfinite(v)))
            return ok, f"grid values bounded={ok}; smoothness not certified"
        vals = np.asarray(self.coeffs if self.kind == "cosine" else (self.value,))
        ok = bool(np.all(np.isfinite(vals)))
        return ok, f"{self.kind} initial condition bounded={ok}, zero boundary flux"


@dataclass(frozen=True)
class Problem:
    """Everything a solve needs: kernel, noise realization, data and the norm order."""

    kernel: SpectralKernel
    noise: NoiseField
    phi: InitialCondition
    g: NonlinearitySpec
    h: NonlinearitySpec
    alpha: float

    def __post_init__(self) -> None:
        if self.noise.basis.grid != self.kernel.grid:
            raise DomainError("noise and kernel must live on the same spatial grid")

    @property
    def grid(self) -> TimeGrid:
        return self.noise.grid

    @property
    def spatial(self) -> SpatialGrid:
        return self.kernel.grid


@dataclass
class SolutionPath:
    """States u(., t_k) on the spatial grid, one row per time node."""

    grid: TimeGrid
    spatial: SpatialGrid
    values: np.ndarray  # (n_steps + 1, n_x)
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict)
    norms: AlphaNorms | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps + 1, self.spatial.n_x):
            raise DomainError(f"states have shape {self.values.shape}")

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def state(self, k: int) -> GridFunction:
        return GridFunction(self.spatial, self.values[k])

    def l2_norms(self) -> np.ndarray:
        return self.spatial.norm(self.values)

    def attach_norms(self, alpha: float) -> "SolutionPath":
        self.norms = alpha_norms(self.times, self.values, self.spatial.weights, alpha)
        return self


# -- the three mild terms ---------------------------------------------------------


def _multipliers(kernel: SpectralKernel, grid: TimeGrid) -> np.ndarray:
    return kernel.step_multipliers(grid.points)  # (n_steps, M)


def eval_A(kernel: SpectralKernel, phi, grid: TimeGrid) -> np.ndarray:
    """Mode coefficients of U(t_k, 0) phi; shape (n_steps + 1, M)."""
    v = phi.values(kernel.grid) if isinstance(phi, InitialCondition) else np.asarray(phi, dtype=float)
    c0 = kernel.basis.project(v)
    return c0[None, :] * kernel.multipliers(grid.points, 0.0)


def eval_B(kernel: SpectralKernel, u: np.ndarray, g: NonlinearitySpec, grid: TimeGrid) -> np.ndarray:
    """Mode coefficients of int_0^t U(t, tau) g(u(tau)) dtau, left point in tau.

    ``u`` holds grid values of shape (n_steps + 1, n_x).
    """
    E = _multipliers(kernel, grid)
    out = np.zeros((grid.n_steps + 1, kernel.n_modes))
    if g.kind == "zero":
        return out
    src = kernel.basis.project(g(u[:-1])) * grid.dt  # (n_steps, M)
    for k in range(grid.n_steps):
        out[k + 1] = E[k] * (out[k] + src[k])
    return out


def eval_C(kernel: SpectralKernel, u: np.ndarray, h: NonlinearitySpec, noise: NoiseField) -> np.ndarray:
    """Mode coefficients of the stochastic convolution, left point in tau.

    C(t_{k+1}) = sum_{j <= k} U(t_{k+1}, t_j) [h(u_j) Delta W_j], where
    Delta W_j = sum_i lambda_i^{1/2} e_i (B_i(t_{j+1}) - B_i(t_j)).
    """
    grid = noise.grid
    E = _multipliers(kernel, grid)
    out = np.zeros((grid.n_steps + 1, kernel.n_modes))
    if h.kind == "zero":
        return out
    src = kernel.basis.project(h(u[:-1]) * noise.increments())
    for k in range(grid.n_steps):
        out[k + 1] = E[k] * (out[k] + src[k])
    return out


def _synth(kernel: SpectralKernel, coeffs: np.ndarray) -> np.ndarray:
    return kernel.basis.synthesize(coeffs)


def _warn_hypotheses(problem: Problem) -> None:
    bad = problem.noise.cov.violations()
    if bad:
        log.warning("Hypothesis (C) fails: %s", "; ".join(bad))
    if not problem.h.is_affine:
        log.warning("h is not affine: convergence and uniqueness are not guaranteed; reporting diagnostics only")


# -- Picard iteration for the mild form -----------------------------------------------


def solve_mild_picard(problem: Problem, tol: float = 1e-6, max_iter: int = 50) -> SolutionPath:
    """Iterate u <- A(phi) + B(u) + C(u) from u = A(phi).

    Stops when the alpha,2,T distance of successive iterates drops below
    ``tol``.  The history records every distance and successive ratio.
    """
    _warn_hypotheses(problem)
    kernel, grid, alpha = problem.kernel, problem.grid, problem.alpha
    a = eval_A(kernel, problem.phi, grid)
    u = _synth(kernel, a)
    t = grid.points
    w = problem.spatial.weights
    history: list[float] = []
    for it in range(1, max_iter + 1):
        coeffs = a + eval_B(kernel, u, problem.g, grid) + eval_C(kernel, u, problem.h, problem.noise)
        new = _synth(kernel, coeffs)
        if not np.all(np.isfinite(new)):
            raise NumericalError("Picard iterate is not finite", {"history": history, "iteration": it})
        dist = norm_alpha_2_T(t, new - u, w, alpha)
        history.append(dist)
        u = new
        if dist < tol:
            break
    else:
        raise NumericalError(
            f"Picard iteration did not reach tol={tol} in {max_iter} iterations",
            {"history": history, "ratios": _ratios(history)},
        )
    diag = {"iterations": len(history), "history": history, "ratios": _ratios(history), "tol": tol}
    return SolutionPath(grid, problem.spatial, u, "mild-picard", diag).attach_norms(alpha)


def _ratios(history: list[float]) -> list[float]:
    return [b / a if a > 0 else 0.0 for a, b in zip(history, history[1:])]


def mild_residual(problem: Problem, u: SolutionPath) -> float:
    """||u - (A(phi) + B(u) + C(u))||_{alpha,2,T}, recomputed from scratch."""
    kernel, grid = problem.kernel, problem.grid
    coeffs = eval_A(kernel, problem.phi, grid) + eval_B(kernel, u.values, problem.g, grid)
    coeffs += eval_C(kernel, u.values, problem.h, problem.noise)
    return norm_alpha_2_T(grid.points, u.values - _synth(kernel, coeffs), problem.spatial.weights, problem.alpha)


# -- spectral Galerkin for the variational form -------------------------------------------


def solve_galerkin(problem: Problem, blowup: float = 1e12) -> SolutionPath:
    """Linearly implicit Euler for the Galerkin mode amplitudes.

    u_j^{n+1} (1 + mu_j (K(t_{n+1}) - K(t_n))) = u_j^n + dt (e_j, g(u^n)) + (e_j, h(u^n) Delta W_n).

    The stiff diffusion term is implicit (explicit Euler needs
    mu_max dt < 2, far below desk-scale step counts); the nonlinear drift and
    the noise stay explicit, with exact fBm increments.
    """
    _warn_hypotheses(problem)
    kernel, grid, noise = problem.kernel, problem.grid, problem.noise
    basis = kernel.basis
    dK = np.diff(problem.kernel.diffusivity.cumulative(grid.points))
    denom = 1.0 + np.multiply.outer(dK, kernel.eigenvalues)  # (n_steps, M)
    dW = noise.increments()
    coeffs = np.zeros((grid.n_steps + 1, kernel.n_modes))
    coeffs[0] = basis.project(problem.phi.values(kernel.grid))
    u = basis.synthesize(coeffs[0])
    for n in range(grid.n_steps):
        rhs = coeffs[n].copy()
        if problem.g.kind != "zero":
            rhs += grid.dt * basis.project(problem.g(u))
        if problem.h.kind != "zero":
            rhs += basis.project(problem.h(u) * dW[n])
        coeffs[n + 1] = rhs / denom[n]
        u = basis.synthesize(coeffs[n + 1])
        size = float(np.sqrt(np.sum(coeffs[n + 1] ** 2)))
        if not math.isfinite(size) or size > blowup:
            raise NumericalError("Galerkin solution blew up", {"step": n + 1, "l2_norm": size})
    values = basis.synthesize(coeffs)
    return SolutionPath(grid, problem.spatial, values, "galerkin", {"steps": grid.n_steps}).attach_norms(problem.alpha)


# -- comparison ---------------------------------------------------------------------


def compare_solutions(u_mild: SolutionPath, u_galerkin: SolutionPath) -> dict[str, Any]:
    """sup_t ||u_M - u_V||_2, absolute and relative to sup_t ||u_M||_2."""
    if u_mild.grid != u_galerkin.grid or u_mild.spatial != u_galerkin.spatial:
        raise DomainError("solutions live on different grids; rerun with the same configuration")
    diff = u_mild.spatial.norm(u_mild.values - u_galerkin.values)
    scale = float(np.max(u_mild.l2_norms()))
    sup = float(np.max(diff))
    return {
        "sup_distance": sup,
        "relative_distance": sup / scale if scale > 0 else (0.0 if sup == 0 else math.inf),
        "sup_norm_mild": scale,
        "n_steps": u_mild.grid.n_steps,
        "n_x": u_mild.spatial.n_x,
    }
