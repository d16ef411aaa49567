"""Classifiers and evaluation statistics.

The SVM is a one-vs-one multiclass wrapper around a sequential minimal
optimization solver (Platt 1998) with maximal-violating-pair working set
selection, RBF kernel only. A k-nearest-neighbor classifier is provided as
a cheap fitness surrogate for wrapper feature selection. Evaluation covers
confusion-matrix metrics, one-vs-all ROC curves with trapezoidal AUC, and
McNemar's paired test with continuity correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataspace import LabeledFeatureSet
from .errors import DataError, NumericalError

SMO_TOL = 1e-3
SMO_MAX_PASSES = 100_000


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    gamma: float | str = "scale"

    def __post_init__(self):
        if not (self.C > 0.0):
            raise ValueError(f"C must be positive, got {self.C}")
        if isinstance(self.gamma, str):
            if self.gamma != "scale":
                raise ValueError(f"gamma must be positive or 'scale', got {self.gamma!r}")
        elif not (self.gamma > 0.0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {self.k}")


def rbf_kernel(X: np.ndarray, Z: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||x - z||^2) for every row pair."""
    sq = (X * X).sum(axis=1)[:, None] + (Z * Z).sum(axis=1)[None, :] - 2.0 * (X @ Z.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _smo_solve(K: np.ndarray, y: np.ndarray, C: float,
               tol: float = SMO_TOL, max_passes: int = SMO_MAX_PASSES
               ) -> tuple[np.ndarray, float]:
    """Solve the binary SVM dual on a precomputed kernel matrix.

    Working pairs are chosen by the maximal-violating-pair rule, which is
    deterministic (argmax/argmin break ties toward the lowest index).
    Returns the alpha vector and the bias term.
    """
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a^T Q a - e^T a at a = 0
    pos = y > 0
    for _ in range(max_passes):
        yg = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
        low = (pos & (alpha > 0.0)) | (~pos & (alpha < C))
        m_val = np.max(np.where(up, yg, -np.inf))
        M_val = np.min(np.where(low, yg, np.inf))
        if m_val - M_val <= tol:
            return alpha, 0.5 * (m_val + M_val)
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        j = int(np.argmin(np.where(low, yg, np.inf)))
        # feasible direction: alpha_i += y_i t, alpha_j -= y_j t
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        quad = max(quad, 1e-12)
        t_star = (yg[i] - yg[j]) / quad
        if y[i] > 0:
            t_hi, t_lo = C - alpha[i], -alpha[i]
        else:
            t_hi, t_lo = alpha[i], alpha[i] - C
        if y[j] > 0:
            t_hi, t_lo = min(t_hi, alpha[j]), max(t_lo, alpha[j] - C)
        else:
            t_hi, t_lo = min(t_hi, C - alpha[j]), max(t_lo, -alpha[j])
        t_step = min(max(t_star, t_lo), t_hi)
        d_i = y[i] * t_step
        d_j = -y[j] * t_step
        alpha[i] += d_i
        alpha[j] += d_j
        grad += (K[:, i] * y[i] * d_i + K[:, j] * y[j] * d_j) * y
        np.clip(alpha, 0.0, C, out=alpha)
    raise NumericalError(f"SMO did not converge within {max_passes} passes")


@dataclass
class _PairModel:
    class_a: int            # mapped to y = +1
    class_b: int            # mapped to y = -1
    vectors: np.ndarray     # support vectors
    coef: np.ndarray        # alpha_i * y_i for the support vectors
    bias: float


@dataclass
class SvmModel:
    """One-vs-one RBF SVM: one SMO subproblem per class pair."""

    pairs: list[_PairModel]
    n_classes: int
    n_dims: int
    gamma: float
    C: float


def _gamma_value(gamma: float | str, X: np.ndarray) -> float:
    if isinstance(gamma, str):
        var = float(X.var(axis=0).mean())
        if var == 0.0:
            return 1.0 / X.shape[1]
        return 1.0 / (X.shape[1] * var)
    return float(gamma)


def train_svm(train: LabeledFeatureSet, C: float = 1.0,
              gamma: float | str = "scale") -> SvmModel:
    """Train the one-vs-one SVM. gamma "scale" is 1/(n_dims * mean variance)."""
    cfg = SvmConfig(C=C, gamma=gamma)
    if train.n_classes < 2:
        raise DataError("SVM needs at least 2 classes")
    g = _gamma_value(cfg.gamma, train.features)
    pairs = []
    for a in range(train.n_classes):
        for b in range(a + 1, train.n_classes):
            idx = np.flatnonzero((train.labels == a) | (train.labels == b))
            X = train.features[idx]
            y = np.where(train.labels[idx] == a, 1.0, -1.0)
            K = rbf_kernel(X, X, g)
            try:
                alpha, bias = _smo_solve(K, y, cfg.C)
            except NumericalError as e:
                raise NumericalError(f"{e} for class pair ({a}, {b})") from None
            sv = alpha > 1e-12
            pairs.append(_PairModel(a, b, X[sv].copy(), (alpha * y)[sv], bias))
    return SvmModel(pairs, train.n_classes, train.n_dims, g, cfg.C)


@dataclass
class KnnModel:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    k: int


def train_knn(train: LabeledFeatureSet, k: int = 5) -> KnnModel:
    """Store the training set for k-nearest-neighbor prediction; k must be odd."""
    KnnConfig(k=k)
    k_eff = min(k, train.n_samples)
    return KnnModel(train.features.copy(), train.labels.copy(),
                    train.n_classes, k_eff)


def _predict_svm(model: SvmModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = X.shape[0]
    k = model.n_classes
    votes = np.zeros((n, k), dtype=np.int64)
    scores = np.zeros((n, k))
    for pm in model.pairs:
        u = rbf_kernel(X, pm.vectors, model.gamma) @ pm.coef + pm.bias
        win_a = u > 0.0
        votes[win_a, pm.class_a] += 1
        votes[~win_a, pm.class_b] += 1
        scores[:, pm.class_a] += u
        scores[:, pm.class_b] -= u
    # vote ties fall to the larger summed decision value, then lower index
    best = votes == votes.max(axis=1, keepdims=True)
    masked = np.where(best, scores, -np.inf)
    labels = np.argmax(masked, axis=1).astype(np.int64)
    return labels, scores


def _predict_knn(model: KnnModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = X.shape[0]
    if n == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros((0, model.n_classes)))
    sq = ((X * X).sum(axis=1)[:, None]
          + (model.features * model.features).sum(axis=1)[None, :]
          - 2.0 * (X @ model.features.T))
    order = np.argsort(sq, axis=1, kind="stable")[:, :model.k]
    neighbor_labels = model.labels[order]
    counts = np.zeros((n, model.n_classes), dtype=np.int64)
    for c in range(model.n_classes):
        counts[:, c] = (neighbor_labels == c).sum(axis=1)
    labels = np.argmax(counts, axis=1).astype(np.int64)  # first max: lowest class
    return labels, counts / model.k


def predict(model, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predict labels and per-class scores for a feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    if isinstance(model, SvmModel):
        if X.ndim != 2 or X.shape[1] != model.n_dims:
            raise DataError(f"expected {model.n_dims} columns, got {X.shape}")
        return _predict_svm(model, X)
    if isinstance(model, KnnModel):
        if X.ndim != 2 or X.shape[1] != model.features.shape[1]:
            raise DataError(f"expected {model.features.shape[1]} columns, got {X.shape}")
        return _predict_knn(model, X)
    raise TypeError(f"unknown model type {type(model)!r}")


def fit_classifier(config, train: LabeledFeatureSet):
    """Dispatch a classifier config to its training routine."""
    if isinstance(config, SvmConfig):
        return train_svm(train, C=config.C, gamma=config.gamma)
    if isinstance(config, KnnConfig):
        return train_knn(train, k=config.k)
    raise TypeError(f"unknown classifier config {type(config)!r}")


@dataclass
class ConfusionMatrix:
    """counts[i, j] = samples of true class i predicted as class j."""

    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DataError("y_true and y_pred must be 1-D and the same length")
    if y_true.size == 0:
        raise DataError("empty label vectors")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise DataError(f"{name} label out of range [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


@dataclass
class Metrics:
    """Per-class and macro-averaged scores from one confusion matrix.

    Precision divides by the predicted-class column sum, recall by the
    true-class row sum. A zero denominator leaves the score 0 and flagged
    undefined; macro averages run over the defined classes only.
    """

    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    precision_defined: np.ndarray
    recall_defined: np.ndarray
    f1_defined: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def _safe_mean(values: np.ndarray, defined: np.ndarray) -> float:
    if not defined.any():
        return 0.0
    return float(values[defined].mean())


def metrics(cm: ConfusionMatrix) -> Metrics:
    M = cm.counts
    total = M.sum()
    if total == 0:
        raise DataError("empty confusion matrix")
    diag = np.diag(M).astype(np.float64)
    col = M.sum(axis=0).astype(np.float64)
    row = M.sum(axis=1).astype(np.float64)
    p_def = col > 0
    r_def = row > 0
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=p_def)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=r_def)
    f_def = p_def & r_def
    denom = precision + recall
    f1 = np.zeros_like(diag)
    nz = f_def & (denom > 0)
    f1[nz] = 2.0 * precision[nz] * recall[nz] / denom[nz]
    weights = row / total
    return Metrics(
        accuracy=float(diag.sum() / total),
        precision=precision, recall=recall, f1=f1,
        precision_defined=p_def, recall_defined=r_def, f1_defined=f_def,
        macro_precision=_safe_mean(precision, p_def),
        macro_recall=_safe_mean(recall, r_def),
        macro_f1=_safe_mean(f1, f_def),
        weighted_precision=float((precision * weights).sum()),
        weighted_recall=float((recall * weights).sum()),
        weighted_f1=float((f1 * weights).sum()),
    )


@dataclass
class RocCurve:
    """One-vs-all operating points for a single class, thresholds descending."""

    class_index: int
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


@dataclass
class RocResult:
    curves: list[RocCurve]

    @property
    def auc(self) -> np.ndarray:
        return np.array([c.auc for c in self.curves])


def _binary_roc(scores: np.ndarray, is_pos: np.ndarray, class_index: int) -> RocCurve:
    n_pos = int(is_pos.sum())
    n_neg = is_pos.size - n_pos
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = is_pos[order]
    # group tied scores into single operating points
    boundary = np.flatnonzero(np.diff(s) != 0.0)
    stops = np.concatenate([boundary, [s.size - 1]])
    tp = np.cumsum(p)[stops]
    fp = (stops + 1) - tp
    thresholds = np.concatenate([[np.inf], s[stops]])
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(class_index, thresholds, fpr, tpr, auc)


def roc_ova(scores: np.ndarray, y_true) -> RocResult:
    """One-vs-all ROC per class from a score matrix (one column per class)."""
    scores = np.asarray(scores, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.int64)
    if scores.ndim != 2:
        raise DataError("scores must be a 2-D matrix")
    if y_true.shape != (scores.shape[0],):
        raise DataError("y_true length does not match scores")
    k = scores.shape[1]
    if k < 2:
        raise DataError("need at least 2 score columns")
    if not np.isfinite(scores).all():
        raise DataError("non-finite scores")
    curves = []
    for c in range(k):
        is_pos = y_true == c
        if not is_pos.any():
            raise DataError(f"class {c} absent from y_true")
        if is_pos.all():
            raise DataError(f"class {c} has no negatives in y_true")
        curves.append(_binary_roc(scores[:, c], is_pos, c))
    return RocResult(curves)


def _gammaincc(a: float, x: float) -> float:
    # regularized upper incomplete gamma Q(a, x); series for the lower
    # function on x < a + 1, Lentz continued fraction otherwise
    if x < 0.0 or a <= 0.0:
        raise ValueError("gammaincc requires x >= 0 and a > 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(1000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                p = total * math.exp(-x + a * math.log(x) - math.lgamma(a))
                return 1.0 - p
        raise NumericalError("incomplete gamma series did not converge")
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalError("incomplete gamma continued fraction did not converge")


def chi_square_sf(x: float, df: int = 1) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1:
        raise ValueError("df must be positive")
    if x < 0.0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0
    return _gammaincc(df / 2.0, x / 2.0)


class McNemarResult(NamedTuple):
    statistic: float
    p_value: float
    b: int
    c: int


def mcnemar(pred_a, pred_b, y_true) -> McNemarResult:
    """McNemar's paired test with continuity correction.

    b counts samples only classifier A got right, c those only B got
    right. Identical disagreement counts of zero yield statistic 0 and
    p = 1 by convention.
    """
    pred_a = np.asarray(pred_a, dtype=np.int64)
    pred_b = np.asarray(pred_b, dtype=np.int64)
    y_true = np.asarray(y_true, dtype=np.int64)
    if not (pred_a.shape == pred_b.shape == y_true.shape) or y_true.ndim != 1:
        raise DataError("prediction and truth vectors must be 1-D and equal length")
    if y_true.size == 0:
        raise DataError("empty label vectors")
    a_ok = pred_a == y_true
    b_ok = pred_b == y_true
    b_count = int(np.sum(a_ok & ~b_ok))
    c_count = int(np.sum(~a_ok & b_ok))
    if b_count + c_count == 0:
        return McNemarResult(0.0, 1.0, b_count, c_count)
    stat = (abs(b_count - c_count) - 1.0) ** 2 / (b_count + c_count)
    return McNemarResult(float(stat), chi_square_sf(stat, df=1), b_count, c_count)
