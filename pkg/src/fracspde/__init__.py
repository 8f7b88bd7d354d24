"""Numerical laboratory for parabolic SPDEs driven by fractional noise.

The package is organised bottom-up:

* :mod:`fracspde.fbm` -- exact fBm samplers and the Weyl-derivative functional.
* :mod:`fracspde.noise` -- truncated Hilbert-space valued fractional Wiener process.
* :mod:`fracspde.greens` -- Neumann heat kernel on (0, 1) and its estimates.
* :mod:`fracspde.fracint` -- pathwise Young integrals and fractional norms.
* :mod:`fracspde.solver` -- mild (Picard) and Galerkin solvers.
* :mod:`fracspde.analysis` -- Hoelder regularity and the factorization identity.
* :mod:`fracspde.cli` -- configuration-driven experiment runner.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, FracSPDEError, NumericalError
from .fbm import FbmPath, TimeGrid, fbm_covariance, lambda_alpha, sample_fbm_circulant, sample_fbm_dense

__all__ = [
    "ConfigError",
    "DomainError",
    "FbmPath",
    "FracSPDEError",
    "NumericalError",
    "TimeGrid",
    "__version__",
    "fbm_covariance",
    "lambda_alpha",
    "sample_fbm_circulant",
    "sample_fbm_dense",
]
