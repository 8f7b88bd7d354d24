"""JSON experiment configuration and the objects built from it."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError
from .fbm import TimeGrid
from .greens import DiffusivitySpec, SpectralKernel
from .noise import CovarianceSpec, HypothesisReport, NoiseField, build_noise, check_hypotheses
from .solver import InitialCondition, NonlinearitySpec, Problem
from .spatial import SpatialGrid, SpectralBasis

__all__ = ["ExperimentConfig", "REQUIRED_HYPOTHESES", "STRICT_HYPOTHESES"]

log = logging.getLogger(__name__)

REQUIRED_HYPOTHESES = ("C", "L", "I", "K", "alpha_range")
STRICT_HYPOTHESES = REQUIRED_HYPOTHESES + ("H_gamma", "existence_range")


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class ExperimentConfig:
    T: float = 1.0
    n_steps: int = 256
    n_x: int = 256
    N: int = 16
    M: int = 128
    H: float = 0.75
    alpha: float = 0.3
    spectrum: dict[str, float] = field(default_factory=lambda: {"c0": 1.0, "p": 3.0})
    diffusivity_spec: dict[str, Any] = field(default_factory=lambda: {"k0": 1.0, "kind": "constant"})
    g_spec: dict[str, Any] = field(default_factory=lambda: {"kind": "affine", "a": 0.0, "b": -0.5})
    h_spec: dict[str, Any] = field(default_factory=lambda: {"kind": "affine", "a": 0.5, "b": 0.5})
    phi_spec: dict[str, Any] = field(default_factory=lambda: {"kind": "cosine", "coeffs": [1.0, 0.5, 0.25]})
    seed: int = 0
    ensemble: int = 1
    tol: float = 1e-6
    max_iter: int = 50
    solvers: tuple[str, ...] = ("mild", "galerkin")
    epsilon: float = 0.25
    delta: float = 0.5
    fbm_method: str = "circulant"
    strict_hypotheses: bool = False
    out: str = "out"

    _RENAMES = {"diffusivity": "diffusivity_spec", "g": "g_spec", "h": "h_spec", "phi": "phi_spec"}

    # -- (de)serialization -----------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        data = {}
        known = {f for f in cls.__dataclass_fields__}
        for key, value in raw.items():
            name = cls._RENAMES.get(key, key)
            if name not in known or name.startswith("_"):
                raise ConfigError(f"unknown configuration key {key!r}")
            data[name] = value
        if "solvers" in data:
            data["solvers"] = tuple(data["solvers"])
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate_fields()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        inverse = {v: k for k, v in self._RENAMES.items()}
        out = {inverse.get(k, k): v for k, v in d.items()}
        out["solvers"] = list(self.solvers)
        return out

    def canonical_json(self) -> str:
        """Sorted compact JSON of the run parameters (the output directory is excluded)."""
        d = self.to_dict()
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def with_overrides(self, **kw: Any) -> "ExperimentConfig":
        kw = {self._RENAMES.get(k, k): v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        cfg.validate_fields()
        return cfg

    # -- validation ----------------------------------------------------------------

    def validate_fields(self) -> None:
        problems = []
        if not self.T > 0:
            problems.append(f"T must be positive, got {self.T}")
        for name in ("n_steps", "n_x", "N", "M", "ensemble", "max_iter"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                problems.append(f"{name} must be a positive integer, got {v!r}")
        if not problems:
            if self.n_steps < 2 or self.n_x < 3:
                problems.append("need n_steps >= 2 and n_x >= 3")
            if self.M > self.n_x - 1 or self.N > self.n_x - 1:
                problems.append(f"N={self.N} and M={self.M} must not exceed n_x - 1 = {self.n_x - 1}")
            for name in ("n_steps", "n_x", "N", "M"):
                if not _is_pow2(getattr(self, name)):
                    log.warning("%s=%s is not a power of two", name, getattr(self, name))
        if not 0.0 < self.H < 1.0:
            problems.append(f"H must lie in (0, 1), got {self.H}")
        if not 0.0 < self.epsilon < 0.5:
            problems.append(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            problems.append(f"delta must lie in (0, 1), got {self.delta}")
        if not set(self.solvers) <= {"mild", "galerkin"} or not self.solvers:
            problems.append(f"solvers must be a nonempty subset of ['mild', 'galerkin'], got {list(self.solvers)}")
        if self.fbm_method not in ("circulant", "dense"):
            problems.append(f"fbm_method must be 'circulant' or 'dense', got {self.fbm_method!r}")
        try:
            self.cov
            self.diffusivity
            self.g
            self.h
            self.phi
        except (DomainError, TypeError) as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))

    def hypotheses(self) -> HypothesisReport:
        return check_hypotheses(self)

    def require_hypotheses(self) -> HypothesisReport:
        """Raise :class:`ConfigError` naming every violated hypothesis."""
        rep = self.hypotheses()
        names = STRICT_HYPOTHESES if self.strict_hypotheses else REQUIRED_HYPOTHESES
        bad = rep.failures(names)
        if bad:
            raise ConfigError("hypothesis check failed: " + " | ".join(bad))
        return rep

    # -- derived objects -------------------------------------------------------------

    @property
    def cov(self) -> CovarianceSpec:
        sp = dict(self.spectrum)
        explicit = sp.pop("explicit", None)
        return CovarianceSpec(self.N, explicit=tuple(explicit) if explicit is not None else None, **sp)

    @property
    def diffusivity(self) -> DiffusivitySpec:
        d = dict(self.diffusivity_spec)
        if "table" in d:
            d["table"] = tuple(tuple(r) for r in d["table"])
        return DiffusivitySpec(**d)

    @property
    def g(self) -> NonlinearitySpec:
        return NonlinearitySpec.from_dict(self.g_spec)

    @property
    def h(self) -> NonlinearitySpec:
        return NonlinearitySpec.from_dict(self.h_spec)

    @property
    def phi(self) -> InitialCondition:
        return InitialCondition.from_dict(self.phi_spec)

    @property
    def gamma(self) -> float:
        return self.h.gamma

    @property
    def d(self) -> int:
        return 1

    def ensemble_seeds(self) -> list[int]:
        """Run seeds: the master seed followed by consecutive integers."""
        return [self.seed + j for j in range(self.ensemble)]

    def level_shape(self, level: int, levels: int) -> tuple[int, int, int, int]:
        """(n_steps, n_x, N, M) at ``level`` of ``levels``, halving per coarser level."""
        f = 2 ** (levels - 1 - level)
        shape = (self.n_steps // f, self.n_x // f, max(1, self.N // f), max(1, self.M // f))
        if shape[0] < 2 or shape[1] < 3 or shape[3] > shape[1] - 1:
            raise ConfigError(f"refinement level {level}/{levels} gives the degenerate shape {shape}")
        return shape

    def build_noise(self, seed: int | None = None) -> NoiseField:
        """Noise on the finest time grid (spatial basis attached per level)."""
        seed = self.seed if seed is None else seed
        grid = TimeGrid(self.T, self.n_steps)
        basis = SpectralBasis(SpatialGrid(self.n_x), self.N)
        return build_noise(self.cov, basis, grid, self.H, seed, self.fbm_method)

    def build_problem(self, seed: int | None = None, level: int = 0, levels: int = 1, noise: NoiseField | None = None) -> Problem:
        """Kernel, restricted noise and data at one refinement level."""
        noise = self.build_noise(seed) if noise is None else noise
        n_steps, n_x, N, M = self.level_shape(level, levels)
        spatial = SpatialGrid(n_x)
        kernel = SpectralKernel(self.diffusivity, spatial, M)
        nz = noise.restrict(N, self.n_steps // n_steps).with_basis(SpectralBasis(spatial, N))
        return Problem(kernel, nz, self.phi, self.g, self.h, self.alpha)
