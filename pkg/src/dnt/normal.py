"""Standard normal CDF, quantile, and log-tail helpers.

These wrap ``scipy.special`` so the rest of the package has a single
place that fixes numerical conventions: vectorised evaluation, strict
domain checks for the quantile, and a log-tail form that stays finite
far into the tails where ``1 - cdf(z)`` underflows.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .errors import InvalidArgumentError

__all__ = ["normal_cdf", "normal_quantile", "normal_log_tail"]


def normal_cdf(z: np.ndarray | float) -> np.ndarray | float:
    """Return Phi(z), the standard normal CDF, elementwise."""
    return special.ndtr(z)


def normal_quantile(p: np.ndarray | float) -> np.ndarray | float:
    """Return Phi^-1(p) elementwise.

    Raises
    ------
    InvalidArgumentError
        If any p lies outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if arr.size and not np.all((arr > 0.0) & (arr < 1.0)):
        raise InvalidArgumentError("quantile probabilities must lie in (0, 1)")
    out = special.ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def normal_log_tail(z: np.ndarray | float) -> np.ndarray | float:
    """Return log(1 - Phi(z)) elementwise, finite for large positive z.

    Uses the identity 1 - Phi(z) = Phi(-z) and scipy's log-CDF, which
    switches to an asymptotic expansion instead of underflowing.
    """
    return special.log_ndtr(-np.asarray(z, dtype=float)) if not np.isscalar(z) else float(
        special.log_ndtr(-z)
    )
