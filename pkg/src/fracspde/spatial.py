"""Uniform grids on D = (0, 1), grid functions and the Neumann cosine basis."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = ["GridFunction", "SpatialGrid", "SpectralBasis"]


@dataclass(frozen=True)
class SpatialGrid:
    """``n_x`` equispaced nodes on [0, 1] (endpoints included) with trapezoid weights."""

    n_x: int

    def __post_init__(self) -> None:
        if int(self.n_x) != self.n_x or self.n_x < 3:
            raise DomainError(f"n_x must be an integer >= 3, got {self.n_x}")

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_x)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_x, 1.0 / (self.n_x - 1))
        w[[0, -1]] *= 0.5
        return w

    def inner(self, a, b) -> np.ndarray:
        """L2(D) inner product along the last axis."""
        return np.sum(np.asarray(a) * np.asarray(b) * self.weights, axis=-1)

    def norm(self, v) -> np.ndarray:
        v = np.asarray(v)
        return np.sqrt(np.sum(v * v * self.weights, axis=-1))


@dataclass(frozen=True)
class GridFunction:
    """An element of L2(D) sampled on a :class:`SpatialGrid`."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_x,):
            raise DomainError(f"values must have shape ({self.grid.n_x},), got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def norm(self) -> float:
        return float(self.grid.norm(self.values))

    def inner(self, other: "GridFunction") -> float:
        return float(self.grid.inner(self.values, other.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)

    __rmul__ = __mul__


class SpectralBasis:
    """Neumann eigenfunctions e_0 = 1, e_m = sqrt(2) cos(m pi x) sampled on a grid.

    On the trapezoid grid the first ``n_modes`` functions are exactly
    orthonormal as long as ``2 (n_modes - 1) < 2 (n_x - 1)``, i.e. ``n_modes <= n_x - 1``
    (discrete cosine transform of type I).
    """

    def __init__(self, grid: SpatialGrid, n_modes: int):
        if n_modes < 1:
            raise DomainError("n_modes must be positive")
        if n_modes > grid.n_x - 1:
            raise DomainError(f"n_modes={n_modes} not resolved by n_x={grid.n_x} (need n_modes <= n_x - 1)")
        self.grid = grid
        self.n_modes = n_modes
        m = np.arange(n_modes)
        E = np.sqrt(2.0) * np.cos(np.pi * m[:, None] * grid.x[None, :])
        E[0] = 1.0
        self.matrix = E
        self._analysis = (E * grid.weights).T  # (n_x, n_modes)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_modes)

    def __call__(self, m: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.ones_like(x) if m == 0 else np.sqrt(2.0) * np.cos(m * np.pi * x)

    def project(self, values) -> np.ndarray:
        """Mode coefficients (v, e_m)_2 along the last axis."""
        return np.asarray(values) @ self._analysis

    def synthesize(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs) @ self.matrix

    def orthonormality_residual(self) -> float:
        gram = self.matrix @ self._analysis
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.matrix)))
