"""Perturbations of the submodule generated by ``z1^k - eps e^{it}`` in the Drury-Arveson space."""

__version__ = "0.1.0"

from .core_series import (  # noqa: E402
    DivergentSeriesError,
    closed_sum,
    series_sum,
)
from .frames import ParameterError, TruncationSpec, alpha, beta, gamma  # noqa: E402

__all__ = [
    "__version__",
    "DivergentSeriesError",
    "ParameterError",
    "TruncationSpec",
    "closed_sum",
    "series_sum",
    "alpha",
    "beta",
    "gamma",
]
