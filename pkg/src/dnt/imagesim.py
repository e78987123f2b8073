"""PSNR and SSIM over Q-Q rasters, and the similarity normality statistic.

The statistic compares a sample's raster against the ideal raster for
the same n (points exactly on the anchor line) and negates the
similarity, so larger values mean less normal. SSIM follows the
classic construction: 11x11 Gaussian window (sigma 1.5), stride 1,
valid placements only, constants C1=0.01^2 and C2=0.03^2 at dynamic
range 1, mean pooling. SSIM window statistics of the fixed reference
are cached per sample size because power studies evaluate thousands of
rasters against the same reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidArgumentError
from .qq import QQRaster, ideal_points, qq_points, rasterize
from .sampling import Sample

__all__ = [
    "METRIC_NAMES",
    "SimilarityScore",
    "psnr",
    "ssim",
    "SimilarityReference",
    "similarity_test_statistic",
]

METRIC_NAMES = ("PSNR", "SSIM")

_WINDOW = 11
_SIGMA = 1.5
_C1 = 0.01**2
_C2 = 0.03**2


@dataclass(frozen=True)
class SimilarityScore:
    """A named similarity value: PSNR in dB (possibly +inf), SSIM in [-1, 1]."""

    metric: str
    value: float

    def __post_init__(self) -> None:
        if self.metric not in METRIC_NAMES:
            raise InvalidArgumentError(f"unknown metric {self.metric!r}")
        if self.metric == "SSIM" and not -1.0 - 1e-9 <= self.value <= 1.0 + 1e-9:
            raise InvalidArgumentError("SSIM value must lie in [-1, 1]")
        if self.metric == "PSNR" and math.isnan(self.value):
            raise InvalidArgumentError("PSNR value must not be NaN")


def _kernel() -> np.ndarray:
    offsets = np.arange(_WINDOW, dtype=float) - (_WINDOW // 2)
    g = np.exp(-(offsets**2) / (2.0 * _SIGMA**2))
    return g / g.sum()


_G = _kernel()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    """Separable Gaussian window sum over all fully-inside placements."""
    rows = sliding_window_view(img, _WINDOW, axis=1) @ _G
    return sliding_window_view(rows, _WINDOW, axis=0) @ _G


def _pixels_pair(a: QQRaster, b: QQRaster) -> tuple[np.ndarray, np.ndarray]:
    if a.pixels.shape != b.pixels.shape:
        raise InvalidArgumentError("rasters must share dimensions")
    return a.pixels, b.pixels


def psnr(a: QQRaster, b: QQRaster) -> SimilarityScore:
    """10 log10(1/MSE) on [0,1] intensities; identical images give +inf."""
    pa, pb = _pixels_pair(a, b)
    mse = float(np.mean((pa - pb) ** 2))
    value = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    return SimilarityScore("PSNR", value)


def _ssim_mean(
    pa: np.ndarray,
    mu_a: np.ndarray,
    var_a: np.ndarray,
    pb: np.ndarray,
    mu_b: np.ndarray,
    var_b: np.ndarray,
) -> float:
    cov = _filter_valid(pa * pb) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
    den = (mu_a**2 + mu_b**2 + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


def ssim(a: QQRaster, b: QQRaster) -> SimilarityScore:
    """Mean structural similarity over sliding Gaussian windows."""
    pa, pb = _pixels_pair(a, b)
    if min(pa.shape) < _WINDOW:
        raise InvalidArgumentError(f"rasters must be at least {_WINDOW}x{_WINDOW}")
    mu_a = _filter_valid(pa)
    mu_b = _filter_valid(pb)
    var_a = _filter_valid(pa * pa) - mu_a**2
    var_b = _filter_valid(pb * pb) - mu_b**2
    return SimilarityScore("SSIM", _ssim_mean(pa, mu_a, var_a, pb, mu_b, var_b))


class SimilarityReference:
    """A fixed reference raster with precomputed SSIM window statistics."""

    def __init__(self, reference: QQRaster):
        self.raster = reference
        self._pixels = reference.pixels
        self._mu = _filter_valid(self._pixels)
        self._var = _filter_valid(self._pixels * self._pixels) - self._mu**2

    @classmethod
    def ideal(cls, n: int) -> "SimilarityReference":
        """Reference for samples of size n: points exactly on the line."""
        return cls(rasterize(ideal_points(n)))

    def ssim_against(self, candidate: QQRaster) -> float:
        pa, pb = _pixels_pair(candidate, self.raster)
        mu_a = _filter_valid(pa)
        var_a = _filter_valid(pa * pa) - mu_a**2
        return _ssim_mean(pa, mu_a, var_a, pb, self._mu, self._var)

    def psnr_against(self, candidate: QQRaster) -> float:
        return psnr(candidate, self.raster).value

    def statistic(self, candidate: QQRaster, metric: str) -> float:
        """Negated similarity to the reference; larger means less normal."""
        if metric == "SSIM":
            return -self.ssim_against(candidate)
        if metric == "PSNR":
            return -self.psnr_against(candidate)
        raise InvalidArgumentError(f"unknown metric {metric!r}")


_REFERENCE_CACHE: dict[int, SimilarityReference] = {}


def _reference_for(n: int) -> SimilarityReference:
    ref = _REFERENCE_CACHE.get(n)
    if ref is None:
        ref = SimilarityReference.ideal(n)
        _REFERENCE_CACHE[n] = ref
    return ref


def similarity_test_statistic(
    x: Sample | np.ndarray,
    metric: str = "SSIM",
    reference: QQRaster | None = None,
) -> float:
    """Normality statistic: negated similarity of x's raster to a reference.

    The reference defaults to the ideal raster for len(x); passing one
    explicitly bypasses the per-n cache.
    """
    if metric not in METRIC_NAMES:
        raise InvalidArgumentError(f"unknown metric {metric!r}")
    n = len(x.values) if isinstance(x, Sample) else int(np.asarray(x).size)
    candidate = rasterize(qq_points(x))
    ref = _reference_for(n) if reference is None else SimilarityReference(reference)
    return ref.statistic(candidate, metric)
