"""Large-margin nearest-neighbor learning of a Mahalanobis metric.

The learned object is a symmetric positive-semidefinite matrix M.
Training minimizes a pull term (squared distances between each focal
point and its k same-class target neighbors) plus a weighted hinge
push term over triplets (focal, target, impostor), by full-batch
projected gradient descent: after every step M is projected back onto
the PSD cone by eigendecomposition. Triplets are built once from
Euclidean neighborhoods and never re-mined, so the objective is fixed
and accepted-step losses are non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, TrainingError
from .features import FeatureVector

__all__ = [
    "MetricMatrix",
    "TripletSet",
    "LmnnConfig",
    "mahalanobis_distance",
    "build_triplets",
    "train_metric",
    "transform",
]

_SYM_TOL = 1e-10
_EIG_TOL = 1e-8
_QUAD_TOL = 1e-10
_MIN_STEP = 1e-18


@dataclass(frozen=True)
class MetricMatrix:
    """A symmetric PSD matrix defining a squared form d^2 = delta' M delta."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float).copy()
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InvalidArgumentError("metric must be a nonempty square matrix")
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentError("metric entries must be finite")
        if float(np.abs(m - m.T).max()) >= _SYM_TOL:
            raise InvalidArgumentError("metric must be symmetric")
        eigenvalues = np.linalg.eigvalsh(m)
        if float(eigenvalues.min()) < -_EIG_TOL:
            raise InvalidArgumentError("metric must be positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def factor(self) -> np.ndarray:
        """U with U U' = matrix, via eigenvectors scaled by sqrt eigenvalues."""
        values, vectors = np.linalg.eigh(self.matrix)
        return vectors * np.sqrt(np.clip(values, 0.0, None))

    @classmethod
    def identity(cls, dim: int) -> "MetricMatrix":
        return cls(np.eye(dim))


@dataclass(frozen=True)
class TripletSet:
    """Static training structure: pull pairs and push triplets.

    pairs holds every (focal, target-neighbor) index pair; triplets
    holds (focal, target, impostor) index rows. Impostors are the
    different-class points inside each focal's 3k-nearest Euclidean
    neighborhood, so a focal with no nearby impostors contributes pull
    pairs but no triplets.
    """

    pairs: np.ndarray
    triplets: np.ndarray
    k: int

    def __post_init__(self) -> None:
        pairs = np.asarray(self.pairs, dtype=np.int64).copy()
        triplets = np.asarray(self.triplets, dtype=np.int64).copy()
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
            raise InvalidArgumentError("pairs must be a nonempty (P, 2) index array")
        if triplets.size and (triplets.ndim != 2 or triplets.shape[1] != 3):
            raise InvalidArgumentError("triplets must be a (T, 3) index array")
        if self.k < 1:
            raise InvalidArgumentError("k must be at least 1")
        pairs.flags.writeable = False
        triplets = triplets.reshape(-1, 3)
        triplets.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "triplets", triplets)


@dataclass(frozen=True)
class LmnnConfig:
    """Hyperparameters of the projected-gradient trainer."""

    k: int = 25
    push_weight: float = 1.0
    margin: float = 1.0
    max_iters: int = 200
    step_size: float = 1e-3
    tolerance: float = 1e-6

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidArgumentError("k must be at least 1")
        if self.push_weight <= 0 or self.margin <= 0:
            raise InvalidArgumentError("push_weight and margin must be positive")
        if self.max_iters < 0:
            raise InvalidArgumentError("max_iters must be nonnegative")
        if self.step_size <= 0 or self.tolerance <= 0:
            raise InvalidArgumentError("step_size and tolerance must be positive")


def _vector(v: FeatureVector | np.ndarray) -> np.ndarray:
    arr = v.values if isinstance(v, FeatureVector) else np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidArgumentError("expected a 1-D vector")
    return arr


def mahalanobis_distance(
    a: FeatureVector | np.ndarray,
    b: FeatureVector | np.ndarray,
    m: MetricMatrix,
) -> float:
    """sqrt(delta' M delta) with tiny negative quadratic forms clamped to 0."""
    va = _vector(a)
    vb = _vector(b)
    if va.size != vb.size or va.size != m.dim:
        raise InvalidArgumentError("vector and metric dimensions must match")
    delta = va - vb
    quad = float(delta @ m.matrix @ delta)
    if quad < -_QUAD_TOL:
        raise InvalidArgumentError("quadratic form is negative; metric is not PSD")
    return float(np.sqrt(max(quad, 0.0)))


def _feature_matrix(features: np.ndarray | list[FeatureVector]) -> np.ndarray:
    if isinstance(features, np.ndarray):
        matrix = np.asarray(features, dtype=float)
    else:
        matrix = np.stack([_vector(v) for v in features])
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise InvalidArgumentError("need a 2-D feature matrix with at least 2 rows")
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgumentError("features must be finite")
    return matrix


def build_triplets(
    features: np.ndarray | list[FeatureVector],
    labels: np.ndarray,
    k: int,
) -> TripletSet:
    """Pick k target neighbors per focal and impostors from its 3k-neighborhood.

    Focals are the points of every class with at least k+1 members
    (smaller classes still serve as impostors). Neighbor ranking is by
    Euclidean distance with ties broken toward the lower index; the
    result depends only on the input order, never on randomness.
    """
    x = _feature_matrix(features)
    y = np.asarray(labels)
    n = x.shape[0]
    if y.shape != (n,):
        raise InvalidArgumentError("labels must align with feature rows")
    if not np.all(np.isin(y, (0, 1))):
        raise InvalidArgumentError("labels must be 0 or 1")
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")

    class_counts = {label: int(np.sum(y == label)) for label in np.unique(y)}
    focal_classes = {label for label, count in class_counts.items() if count >= k + 1}
    if not focal_classes:
        raise InsufficientDataError(
            f"no class has the k+1 = {k + 1} members needed for target neighbors"
        )

    sq_norms = np.einsum("ij,ij->i", x, x)
    gram = x @ x.T
    dist_sq = np.maximum(sq_norms[:, None] + sq_norms[None, :] - 2.0 * gram, 0.0)
    order = np.argsort(dist_sq, axis=1, kind="stable")

    pairs: list[tuple[int, int]] = []
    triplets: list[tuple[int, int, int]] = []
    pool = 3 * k
    for i in range(n):
        if y[i] not in focal_classes:
            continue
        row = order[i]
        row = row[row != i]
        positives = [int(j) for j in row if y[j] == y[i]][:k]
        impostors = [int(l) for l in row[:pool] if y[l] != y[i]]
        for j in positives:
            pairs.append((i, j))
            for l in impostors:
                triplets.append((i, j, l))
    return TripletSet(
        np.array(pairs, dtype=np.int64),
        np.array(triplets, dtype=np.int64).reshape(-1, 3),
        k,
    )


def _project_psd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest PSD matrix (negative eigenvalues zeroed) and its factor."""
    sym = 0.5 * (a + a.T)
    values, vectors = np.linalg.eigh(sym)
    clipped = np.clip(values, 0.0, None)
    projected = (vectors * clipped) @ vectors.T
    factor = vectors * np.sqrt(clipped)
    return 0.5 * (projected + projected.T), factor


class _Objective:
    """Fixed triplet structure with loss and gradient evaluation."""

    def __init__(self, x: np.ndarray, ts: TripletSet, push_weight: float, margin: float):
        self.push_weight = push_weight
        self.margin = margin
        self.x = x
        n = x.shape[0]
        pi, pj = ts.pairs[:, 0], ts.pairs[:, 1]
        self.pair_i, self.pair_j = pi, pj
        self.pull_diffs = x[pi] - x[pj]
        self.pull_gram = self.pull_diffs.T @ self.pull_diffs

        if ts.triplets.shape[0]:
            ti, tj, tl = ts.triplets[:, 0], ts.triplets[:, 1], ts.triplets[:, 2]
            pair_codes = pi * n + pj
            pair_order = np.argsort(pair_codes)
            self.trip_pair_idx = pair_order[
                np.searchsorted(pair_codes[pair_order], ti * n + tj)
            ]
            imp_codes, self.trip_imp_idx = np.unique(ti * n + tl, return_inverse=True)
            ui, ul = imp_codes // n, imp_codes % n
            self.imp_diffs = x[ui] - x[ul]
        else:
            self.trip_pair_idx = np.empty(0, dtype=np.int64)
            self.trip_imp_idx = np.empty(0, dtype=np.int64)
            self.imp_diffs = np.empty((0, x.shape[1]))

    def evaluate(self, factor: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Loss at M = factor factor', plus active-triplet pair weights."""
        z = self.x @ factor
        zp = z[self.pair_i] - z[self.pair_j]
        pull_sq = np.einsum("ij,ij->i", zp, zp)
        loss = float(pull_sq.sum())
        if self.trip_pair_idx.size:
            zi = self.imp_diffs @ factor
            imp_sq = np.einsum("ij,ij->i", zi, zi)
            hinge = self.margin + pull_sq[self.trip_pair_idx] - imp_sq[self.trip_imp_idx]
            active = hinge > 0.0
            loss += self.push_weight * float(hinge[active].sum())
            w_pair = np.bincount(
                self.trip_pair_idx[active], minlength=self.pair_i.size
            ).astype(float)
            w_imp = np.bincount(
                self.trip_imp_idx[active], minlength=self.imp_diffs.shape[0]
            ).astype(float)
        else:
            w_pair = np.zeros(self.pair_i.size)
            w_imp = np.zeros(0)
        return loss, w_pair, w_imp

    def gradient(self, w_pair: np.ndarray, w_imp: np.ndarray) -> np.ndarray:
        grad = self.pull_gram.copy()
        hot = w_pair > 0.0
        if np.any(hot):
            d = self.pull_diffs[hot]
            grad += self.push_weight * (d.T @ (d * w_pair[hot, None]))
        hot = w_imp > 0.0
        if np.any(hot):
            d = self.imp_diffs[hot]
            grad -= self.push_weight * (d.T @ (d * w_imp[hot, None]))
        return grad


def train_metric(
    features: np.ndarray | list[FeatureVector],
    labels: np.ndarray,
    cfg: LmnnConfig,
) -> MetricMatrix:
    """Fit M by projected gradient descent from the identity.

    A step that raises the loss is rejected and halves the step size;
    accepted losses are therefore non-increasing. Stops on max_iters,
    relative improvement below cfg.tolerance, or step-size underflow,
    and returns the lowest-loss iterate observed.
    """
    x = _feature_matrix(features)
    ts = build_triplets(x, labels, cfg.k)
    objective = _Objective(x, ts, cfg.push_weight, cfg.margin)

    dim = x.shape[1]
    m = np.eye(dim)
    factor = np.eye(dim)
    loss, w_pair, w_imp = objective.evaluate(factor)
    if not np.isfinite(loss):
        raise TrainingError("initial loss is not finite")
    best_loss, best_m = loss, m
    step = cfg.step_size
    grad = objective.gradient(w_pair, w_imp) if cfg.max_iters else None

    iters = 0
    while iters < cfg.max_iters:
        iters += 1
        candidate, cand_factor = _project_psd(m - step * grad)
        cand_loss, cand_w_pair, cand_w_imp = objective.evaluate(cand_factor)
        if not np.isfinite(cand_loss):
            raise TrainingError("training diverged to a non-finite loss")
        if cand_loss > loss:
            step *= 0.5
            if step < _MIN_STEP:
                break
            continue
        improvement = loss - cand_loss
        m, loss = candidate, cand_loss
        if loss < best_loss:
            best_loss, best_m = loss, m
        if improvement < cfg.tolerance * max(abs(loss), 1e-300):
            break
        grad = objective.gradient(cand_w_pair, cand_w_imp)
    return MetricMatrix(best_m)


def transform(v: FeatureVector | np.ndarray, m: MetricMatrix) -> FeatureVector | np.ndarray:
    """Map v to U'v so Euclidean distances realize the learned metric."""
    arr = _vector(v)
    if arr.size != m.dim:
        raise InvalidArgumentError("vector and metric dimensions must match")
    out = m.factor().T @ arr
    if isinstance(v, FeatureVector):
        return FeatureVector(out, v.extractor_id, selected=v.selected)
    return out
