"""End-to-end distance-based normality testing.

Training simulates a null pool and an alternative batch, keeps the
null vectors closest to the pool centroid, selects separating
features, learns a metric, and calibrates a rejection cutoff from the
squared metric distances of the whole null pool to the kept-null
centroid. Testing maps a new sample through the same pipeline and
rejects when its squared distance exceeds the cutoff. Models persist
as canonical JSON whose numeric fields round-trip bit-exactly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .classical import TestStatistic
from .errors import (
    ConfigError,
    FormatError,
    InvalidArgumentError,
    ModelMismatchError,
    UnsupportedVersionError,
)
from .features import (
    EXTRACTOR_IDS,
    IMAGE_GRID_LENGTH,
    FeatureVector,
    SelectionModel,
    apply_selection,
    extract_image,
    extract_raw,
    fit_selection,
)
from .lmnn import LmnnConfig, MetricMatrix, train_metric
from .qq import qq_points, rasterize
from .sampling import (
    DistributionSpec,
    Sample,
    SeedScheme,
    case_spec,
    sample,
)

__all__ = [
    "MODEL_FORMAT_VERSION",
    "TrainConfig",
    "DNTModel",
    "TestReport",
    "extract_features",
    "train",
    "calibrate_cutoff",
    "dnt_test",
    "save_model",
    "load_model",
]

MODEL_FORMAT_VERSION = "dnt-model-v1"

_NULL_CASE = 15


def _default_h1_spec() -> DistributionSpec:
    return case_spec(4)


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a trained model, including its seed."""

    n: int = 100
    h0_pool: int = 50_000
    h0_keep_fraction: float = 0.01
    h1_count: int = 1_000
    h1_spec: DistributionSpec = field(default_factory=_default_h1_spec)
    d: int = 100
    extractor: str = "RawOrder"
    alpha: float = 0.05
    lmnn: LmnnConfig = field(default_factory=LmnnConfig)
    master_seed: int | None = None
    fresh_null_count: int = 0

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ConfigError("n must be at least 3")
        if self.h0_pool < 2 or self.h1_count < 2:
            raise ConfigError("h0_pool and h1_count must be at least 2")
        if not 0.0 < self.h0_keep_fraction <= 1.0:
            raise ConfigError("h0_keep_fraction must be in (0, 1]")
        if self.extractor not in EXTRACTOR_IDS:
            raise ConfigError(
                f"extractor must be one of {', '.join(EXTRACTOR_IDS)}"
            )
        feature_length = self.n if self.extractor == "RawOrder" else IMAGE_GRID_LENGTH
        if not 1 <= self.d <= feature_length:
            raise ConfigError(
                f"d must be in 1..{feature_length} for extractor {self.extractor}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must be in (0, 1)")
        if self.keep_count < self.lmnn.k + 1:
            raise ConfigError(
                "h0_keep_fraction * h0_pool must be at least lmnn.k + 1"
            )
        if self.fresh_null_count < 0:
            raise ConfigError("fresh_null_count must be nonnegative")

    @property
    def keep_count(self) -> int:
        return int(round(self.h0_keep_fraction * self.h0_pool))


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test: the statistic, the cutoff it faced, the call."""

    statistic: float
    cutoff: float
    reject: bool
    alpha: float

    def __post_init__(self) -> None:
        if self.reject != (self.statistic > self.cutoff):
            raise InvalidArgumentError("reject flag contradicts statistic vs cutoff")

    def summary(self) -> str:
        verdict = "reject" if self.reject else "accept"
        return (
            f"{verdict} normality: statistic={self.statistic:.6g} "
            f"cutoff={self.cutoff:.6g} alpha={self.alpha:g}"
        )


def _quantile_index(count: int, alpha: float) -> int:
    """1-based order-statistic rank of the empirical (1-alpha) quantile."""
    return math.ceil((1.0 - alpha) * count - 1e-9)


@dataclass(frozen=True)
class DNTModel:
    """A trained tester: selection, metric, centroid, null calibration."""

    extractor_id: str
    selection: SelectionModel
    metric: MetricMatrix
    centroid: np.ndarray
    null_distances: np.ndarray
    cutoff: float
    alpha: float
    n: int
    config: TrainConfig

    def __post_init__(self) -> None:
        centroid = np.asarray(self.centroid, dtype=float).copy()
        null = np.asarray(self.null_distances, dtype=float).copy()
        if self.extractor_id not in EXTRACTOR_IDS:
            raise InvalidArgumentError(f"unknown extractor {self.extractor_id!r}")
        if centroid.ndim != 1 or centroid.size != self.selection.d:
            raise InvalidArgumentError("centroid length must equal selection.d")
        if self.metric.dim != self.selection.d:
            raise InvalidArgumentError("metric dimension must equal selection.d")
        if null.ndim != 1 or null.size == 0 or np.any(np.diff(null) < 0):
            raise InvalidArgumentError("null_distances must be sorted ascending")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError("alpha must be in (0, 1)")
        expected = float(null[_quantile_index(null.size, self.alpha) - 1])
        if self.cutoff != expected:
            raise InvalidArgumentError(
                "cutoff is not the (1-alpha) order statistic of null_distances"
            )
        centroid.flags.writeable = False
        null.flags.writeable = False
        object.__setattr__(self, "centroid", centroid)
        object.__setattr__(self, "null_distances", null)


def extract_features(x: Sample | np.ndarray, extractor_id: str) -> FeatureVector:
    """Run one extractor on a sample (rasterizing first if image-based)."""
    if extractor_id == "RawOrder":
        return extract_raw(x)
    if extractor_id == "ImageGrid":
        return extract_image(rasterize(qq_points(x)))
    raise InvalidArgumentError(f"unknown extractor {extractor_id!r}")


def _feature_block(
    spec: DistributionSpec,
    count: int,
    n: int,
    scheme: SeedScheme,
    purpose: str,
    extractor_id: str,
) -> np.ndarray:
    case_id = spec.case_id if spec.case_id is not None else 0
    rows = [
        extract_features(
            sample(spec, n, scheme.stream(case_id, r, purpose)), extractor_id
        ).values
        for r in range(count)
    ]
    return np.stack(rows)


def train(cfg: TrainConfig) -> DNTModel:
    """Simulate, select, learn the metric, and calibrate the cutoff."""
    if cfg.master_seed is None:
        raise ConfigError("master_seed must be set before training")
    scheme = SeedScheme(cfg.master_seed)
    null_spec = case_spec(_NULL_CASE)

    h0 = _feature_block(null_spec, cfg.h0_pool, cfg.n, scheme, "train-h0", cfg.extractor)
    h1 = _feature_block(cfg.h1_spec, cfg.h1_count, cfg.n, scheme, "train-h1", cfg.extractor)

    pool_centroid = h0.mean(axis=0)
    gaps = np.linalg.norm(h0 - pool_centroid, axis=1)
    kept = np.argsort(gaps, kind="stable")[: cfg.keep_count]
    h0_kept = h0[kept]

    selection = fit_selection(h0_kept, h1, cfg.d)
    h0_kept_sel = h0_kept[:, selection.mask]
    h1_sel = h1[:, selection.mask]

    stacked = np.concatenate([h0_kept_sel, h1_sel])
    labels = np.concatenate(
        [np.zeros(h0_kept_sel.shape[0], dtype=int), np.ones(h1_sel.shape[0], dtype=int)]
    )
    metric = train_metric(stacked, labels, cfg.lmnn)

    centroid = h0_kept_sel.mean(axis=0)

    if cfg.fresh_null_count > 0:
        null_sel = _feature_block(
            null_spec, cfg.fresh_null_count, cfg.n, scheme, "calibrate", cfg.extractor
        )[:, selection.mask]
    else:
        null_sel = h0[:, selection.mask]
    deltas = null_sel - centroid
    projected = deltas @ metric.factor()
    null_distances = np.sort(np.einsum("ij,ij->i", projected, projected))
    cutoff = float(null_distances[_quantile_index(null_distances.size, cfg.alpha) - 1])

    return DNTModel(
        extractor_id=cfg.extractor,
        selection=selection,
        metric=metric,
        centroid=centroid,
        null_distances=null_distances,
        cutoff=cutoff,
        alpha=cfg.alpha,
        n=cfg.n,
        config=cfg,
    )


def calibrate_cutoff(
    statistic_fn,
    n: int,
    reps: int,
    alpha: float = 0.05,
    seed: int = 0,
) -> float:
    """Empirical (1-alpha) null quantile of a statistic at sample size n.

    statistic_fn may return a float or a TestStatistic; two-sided
    statistics are calibrated on their absolute value.
    """
    if reps < 100:
        raise InvalidArgumentError("calibration needs at least 100 replicates")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError("alpha must be in (0, 1)")
    scheme = SeedScheme(seed)
    null_spec = case_spec(_NULL_CASE)
    values = np.empty(reps)
    for r in range(reps):
        result = statistic_fn(sample(null_spec, n, scheme.stream(_NULL_CASE, r, "calibrate")))
        values[r] = (
            result.calibration_value if isinstance(result, TestStatistic) else float(result)
        )
    values.sort()
    return float(values[_quantile_index(reps, alpha) - 1])


def dnt_test(x: Sample | np.ndarray, model: DNTModel) -> TestReport:
    """Squared metric distance of x's selected features to the centroid."""
    values = x.values if isinstance(x, Sample) else np.asarray(x, dtype=float)
    if values.size != model.n:
        raise ModelMismatchError(
            f"model was trained for n={model.n}, got a sample of n={values.size}"
        )
    features = extract_features(x, model.extractor_id)
    if len(features) != model.selection.m:
        raise ModelMismatchError(
            f"extracted {len(features)} features but the model selects from "
            f"{model.selection.m}"
        )
    selected = apply_selection(features, model.selection)
    delta = selected.values - model.centroid
    statistic = float(max(delta @ model.metric.matrix @ delta, 0.0))
    return TestReport(
        statistic=statistic,
        cutoff=model.cutoff,
        reject=statistic > model.cutoff,
        alpha=model.alpha,
    )


# ---------------------------------------------------------------------------
# Persistence


def _spec_payload(spec: DistributionSpec) -> dict:
    return {"kind": spec.kind, "params": list(spec.params), "case_id": spec.case_id}


def _config_payload(cfg: TrainConfig) -> dict:
    return {
        "n": cfg.n,
        "h0_pool": cfg.h0_pool,
        "h0_keep_fraction": cfg.h0_keep_fraction,
        "h1_count": cfg.h1_count,
        "h1_spec": _spec_payload(cfg.h1_spec),
        "d": cfg.d,
        "extractor": cfg.extractor,
        "alpha": cfg.alpha,
        "lmnn": {
            "k": cfg.lmnn.k,
            "push_weight": cfg.lmnn.push_weight,
            "margin": cfg.lmnn.margin,
            "max_iters": cfg.lmnn.max_iters,
            "step_size": cfg.lmnn.step_size,
            "tolerance": cfg.lmnn.tolerance,
        },
        "master_seed": cfg.master_seed,
        "fresh_null_count": cfg.fresh_null_count,
    }


def save_model(model: DNTModel, path: str) -> None:
    """Write the model as canonical JSON (sorted keys, exact floats)."""
    payload = {
        "format": MODEL_FORMAT_VERSION,
        "extractor_id": model.extractor_id,
        "n": model.n,
        "alpha": model.alpha,
        "selection": {
            "scores": model.selection.scores.tolist(),
            "mask": model.selection.mask.tolist(),
        },
        "metric": model.metric.matrix.reshape(-1).tolist(),
        "centroid": model.centroid.tolist(),
        "null_distances": model.null_distances.tolist(),
        "cutoff": model.cutoff,
        "config": _config_payload(model.config),
    }
    text = json.dumps(payload, sort_keys=True, allow_nan=False, separators=(",", ":"))
    with open(path, "w", encoding="ascii") as handle:
        handle.write(text)
        handle.write("\n")


class _Reader:
    """Typed field access over a parsed payload, with located errors."""

    def __init__(self, payload: dict, where: str):
        if not isinstance(payload, dict):
            raise FormatError(f"{where}: expected an object")
        self.payload = payload
        self.where = where

    def get(self, key: str, kind: type):
        if key not in self.payload:
            raise FormatError(f"{self.where}.{key}: missing field")
        value = self.payload[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            raise FormatError(f"{self.where}.{key}: expected {kind.__name__}")
        return value

    def vector(self, key: str) -> np.ndarray:
        raw = self.get(key, list)
        try:
            arr = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            raise FormatError(f"{self.where}.{key}: expected a numeric array") from None
        if arr.ndim != 1:
            raise FormatError(f"{self.where}.{key}: expected a flat numeric array")
        return arr

    def child(self, key: str) -> "_Reader":
        return _Reader(self.get(key, dict), f"{self.where}.{key}")


def _load_config(reader: _Reader) -> TrainConfig:
    spec_reader = reader.child("h1_spec")
    case_id = spec_reader.payload.get("case_id")
    if case_id is not None and not isinstance(case_id, int):
        raise FormatError(f"{spec_reader.where}.case_id: expected int or null")
    h1_spec = DistributionSpec(
        spec_reader.get("kind", str),
        tuple(spec_reader.vector("params").tolist()),
        case_id,
    )
    lmnn_reader = reader.child("lmnn")
    lmnn = LmnnConfig(
        k=lmnn_reader.get("k", int),
        push_weight=lmnn_reader.get("push_weight", float),
        margin=lmnn_reader.get("margin", float),
        max_iters=lmnn_reader.get("max_iters", int),
        step_size=lmnn_reader.get("step_size", float),
        tolerance=lmnn_reader.get("tolerance", float),
    )
    master_seed = reader.payload.get("master_seed")
    if master_seed is not None and not isinstance(master_seed, int):
        raise FormatError(f"{reader.where}.master_seed: expected int or null")
    try:
        return TrainConfig(
            n=reader.get("n", int),
            h0_pool=reader.get("h0_pool", int),
            h0_keep_fraction=reader.get("h0_keep_fraction", float),
            h1_count=reader.get("h1_count", int),
            h1_spec=h1_spec,
            d=reader.get("d", int),
            extractor=reader.get("extractor", str),
            alpha=reader.get("alpha", float),
            lmnn=lmnn,
            master_seed=master_seed,
            fresh_null_count=reader.get("fresh_null_count", int),
        )
    except ConfigError as exc:
        raise FormatError(f"{reader.where}: {exc}") from None


def load_model(path: str) -> DNTModel:
    """Read a model file, validating format, version, and invariants."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path, "r", encoding="ascii") as handle:
        text = handle.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from None
    root = _Reader(payload, "model")
    version = root.get("format", str)
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model.format: {version!r} is not supported (expected {MODEL_FORMAT_VERSION!r})"
        )
    selection_reader = root.child("selection")
    try:
        selection = SelectionModel(
            selection_reader.vector("scores"),
            selection_reader.vector("mask").astype(int),
        )
        metric_flat = root.vector("metric")
        dim = int(round(math.isqrt(metric_flat.size)))
        if dim * dim != metric_flat.size:
            raise FormatError("model.metric: length is not a perfect square")
        metric = MetricMatrix(metric_flat.reshape(dim, dim))
        model = DNTModel(
            extractor_id=root.get("extractor_id", str),
            selection=selection,
            metric=metric,
            centroid=root.vector("centroid"),
            null_distances=root.vector("null_distances"),
            cutoff=root.get("cutoff", float),
            alpha=root.get("alpha", float),
            n=root.get("n", int),
            config=_load_config(root.child("config")),
        )
    except InvalidArgumentError as exc:
        raise FormatError(f"model: {exc}") from None
    return model
