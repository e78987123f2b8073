"""Six classical normality-test statistics.

Each statistic is location-scale invariant: the sample is first fitted
by its mean and population (1/n) standard deviation, and the EDF-based
statistics work on u_i = Phi(z_(i)) of the sorted z-scores. Rejection
decisions are not made here; cutoffs come from Monte-Carlo calibration
elsewhere. KS, AD, and GLB also accept a raw u-vector directly (the
"_from_u" forms) so their formulas can be exercised without building
samples.

Tail terms use log Phi computed directly (never log(1 - Phi(z))), so
extreme observations cannot underflow to log(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InsufficientDataError, InvalidArgumentError
from .normal import normal_cdf
from .sampling import Sample, sample_moments

__all__ = [
    "TestStatistic",
    "STATISTIC_NAMES",
    "ks_statistic",
    "ad_statistic",
    "jb_statistic",
    "glb_statistic",
    "gg_statistic",
    "bs_statistic",
    "ks_from_u",
    "ad_from_u",
    "glb_from_u",
    "statistic_fn",
]

STATISTIC_NAMES = ("KS", "AD", "JB", "GLB", "GG", "BS")

_DIRECTION = {
    "KS": "reject-large",
    "AD": "reject-large",
    "JB": "reject-large",
    "GLB": "reject-large",
    "GG": "reject-large",
    "BS": "reject-two-sided",
}


@dataclass(frozen=True)
class TestStatistic:
    """A named statistic value and the direction in which it rejects."""

    name: str
    value: float
    direction: str

    def __post_init__(self) -> None:
        if self.name not in STATISTIC_NAMES:
            raise InvalidArgumentError(f"unknown statistic name {self.name!r}")
        if self.direction != _DIRECTION[self.name]:
            raise InvalidArgumentError(
                f"{self.name} must have direction {_DIRECTION[self.name]!r}"
            )
        if not math.isfinite(self.value):
            raise InvalidArgumentError("statistic value must be finite")

    @property
    def calibration_value(self) -> float:
        """The value whose null quantile sets the cutoff (abs for two-sided)."""
        return abs(self.value) if self.direction == "reject-two-sided" else self.value


def _wrap(name: str, value: float) -> TestStatistic:
    return TestStatistic(name, float(value), _DIRECTION[name])


def _fitted_z(x: Sample | np.ndarray) -> np.ndarray:
    """Ascending z-scores under the mean / population-sd fit."""
    values = x.values if isinstance(x, Sample) else np.asarray(x, dtype=float)
    if values.ndim != 1 or values.size < 3:
        raise InsufficientDataError("need a 1-D sample of at least 3 values")
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("sample values must be finite")
    sd = float(values.std())
    if sd == 0.0:
        raise InsufficientDataError("degenerate sample: zero variance")
    return np.sort((values - values.mean()) / sd)


def _check_u(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise InvalidArgumentError("u must be a nonempty 1-D vector")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise InvalidArgumentError("u values must lie strictly inside (0, 1)")
    if np.any(np.diff(u) < 0):
        raise InvalidArgumentError("u must be ascending (order statistics)")
    return u


def ks_from_u(u: np.ndarray) -> float:
    """D = max_i max(i/n - u_i, u_i - (i-1)/n) for ascending u."""
    u = _check_u(u)
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    return float(np.max(np.maximum(i / n - u, u - (i - 1) / n)))


def ad_from_u(u: np.ndarray) -> float:
    """A^2 = -n - (1/n) sum (2i-1)[ln u_i + ln(1 - u_{n+1-i})]."""
    u = _check_u(u)
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    terms = (2.0 * i - 1.0) * (np.log(u) + np.log1p(-u[::-1]))
    return float(-n - terms.sum() / n)


def glb_from_u(u: np.ndarray) -> float:
    """P_s = -n - (1/n) sum [(2i-1) ln u_i + (2n+1-2i) ln(1 - u_i)].

    The rank weights pair the lower tail of each u with its rank and
    the upper tail with the mirrored rank (ascending order statistics).
    """
    u = _check_u(u)
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    terms = (2.0 * i - 1.0) * np.log(u) + (2.0 * n + 1.0 - 2.0 * i) * np.log1p(-u)
    return float(-n - terms.sum() / n)


def ks_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Largest vertical gap between the fitted normal CDF and the EDF."""
    u = normal_cdf(_fitted_z(x))
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    d = float(np.max(np.maximum(i / n - u, u - (i - 1) / n)))
    return _wrap("KS", d)


def ad_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Quadratic EDF statistic with extra weight in the tails."""
    z = _fitted_z(x)
    n = z.size
    i = np.arange(1, n + 1, dtype=float)
    log_u = special.log_ndtr(z)
    log_1mu = special.log_ndtr(-z)
    terms = (2.0 * i - 1.0) * (log_u + log_1mu[::-1])
    return _wrap("AD", -n - float(terms.sum()) / n)


def jb_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Moment statistic (n/6)(S^2 + (K-3)^2/4) from 1/n moments."""
    n = len(x.values) if isinstance(x, Sample) else np.asarray(x).size
    _, _, skew, kurt = sample_moments(x)
    return _wrap("JB", (n / 6.0) * (skew**2 + (kurt - 3.0) ** 2 / 4.0))


def glb_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Order-statistics statistic weighting both CDF tails per rank."""
    z = _fitted_z(x)
    n = z.size
    i = np.arange(1, n + 1, dtype=float)
    log_u = special.log_ndtr(z)
    log_1mu = special.log_ndtr(-z)
    terms = (2.0 * i - 1.0) * log_u + (2.0 * n + 1.0 - 2.0 * i) * log_1mu
    return _wrap("GLB", -n - float(terms.sum()) / n)


def gg_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Moment statistic scaled by a robust spread estimate.

    RJB = (n/6)(m3/J^3)^2 + (n/64)(m4/J^4 - 3)^2 with
    J = sqrt(pi/2) * mean |x - median|.
    """
    values = x.values if isinstance(x, Sample) else np.asarray(x, dtype=float)
    if values.ndim != 1 or values.size < 3:
        raise InsufficientDataError("need a 1-D sample of at least 3 values")
    n = values.size
    j = math.sqrt(math.pi / 2.0) * float(np.mean(np.abs(values - np.median(values))))
    if j == 0.0:
        raise InsufficientDataError("degenerate sample: zero robust spread")
    centered = values - values.mean()
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    rjb = (n / 6.0) * (m3 / j**3) ** 2 + (n / 64.0) * (m4 / j**4 - 3.0) ** 2
    return _wrap("GG", rjb)


def bs_statistic(x: Sample | np.ndarray) -> TestStatistic:
    """Kurtosis z-statistic from the log ratio of sd to mean deviation.

    z = sqrt(n+2) (w - 3)/3.54 with w = 13.29 (ln sigma - ln tau),
    sigma the population sd and tau the mean absolute deviation.
    """
    values = x.values if isinstance(x, Sample) else np.asarray(x, dtype=float)
    if values.ndim != 1 or values.size < 3:
        raise InsufficientDataError("need a 1-D sample of at least 3 values")
    n = values.size
    sigma = float(values.std())
    tau = float(np.mean(np.abs(values - values.mean())))
    if sigma == 0.0 or tau == 0.0:
        raise InsufficientDataError("degenerate sample: zero spread")
    omega = 13.29 * (math.log(sigma) - math.log(tau))
    return _wrap("BS", math.sqrt(n + 2.0) * (omega - 3.0) / 3.54)


_BY_NAME = {
    "KS": ks_statistic,
    "AD": ad_statistic,
    "JB": jb_statistic,
    "GLB": glb_statistic,
    "GG": gg_statistic,
    "BS": bs_statistic,
}


def statistic_fn(name: str):
    """Look up a statistic function by its short name."""
    try:
        return _BY_NAME[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown statistic {name!r}; expected one of {', '.join(STATISTIC_NAMES)}"
        ) from None
