"""Principal component analysis on a hand-rolled Jacobi eigensolver.

Standardization uses population statistics (1/n). The covariance of the
standardized matrix is decomposed either directly (d <= n) or through the
n x n Gram matrix when the dimensionality exceeds the sample count, in
which case Gram eigenvectors are mapped back and re-normalized. Retained
component count is the smallest m whose cumulative explained variance
reaches the threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DataError, NumericalError

JACOBI_TOL = 1e-11          # relative to the initial Frobenius norm
JACOBI_MAX_SWEEPS = 100
EIG_TIE_TOL = 1e-10


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column centering and scaling learned from a training matrix."""

    means: np.ndarray
    scales: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.means.size:
            raise DataError(f"expected {self.means.size} columns, got {X.shape}")
        return (X - self.means) / self.scales


def identity_standardization(n_dims: int) -> StandardizationParams:
    return StandardizationParams(np.zeros(n_dims), np.ones(n_dims))


def standardize(X: np.ndarray) -> tuple[np.ndarray, StandardizationParams]:
    """Center to zero mean and scale to unit population variance.

    Constant columns get scale 1 and come out exactly zero. Requires at
    least two rows; a single row has no spread to estimate.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("expected a 2-D matrix")
    if X.shape[0] < 2:
        raise DataError(f"need at least 2 rows to standardize, got {X.shape[0]}")
    if not np.isfinite(X).all():
        raise DataError("non-finite values in input")
    const = X.max(axis=0) == X.min(axis=0)
    means = X.mean(axis=0)
    means[const] = X[0, const]  # exact value, avoids rounding residue
    centered = X - means
    centered[:, const] = 0.0
    var = np.mean(centered * centered, axis=0)
    scales = np.sqrt(var)
    scales[const | (var == 0.0)] = 1.0
    return centered / scales, StandardizationParams(means, scales)


def _off_norm(A: np.ndarray) -> float:
    # summed from the entries themselves: a grand-total-minus-diagonal
    # shortcut cancels catastrophically once the off part is tiny
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


@njit("int64(float64[:, ::1], float64[:, ::1], float64, float64, int64)",
      cache=True)
def _jacobi_sweeps(A, VT, threshold, skip_tol, max_sweeps):  # pragma: no cover
    n = A.shape[0]
    for sweep in range(max_sweeps):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip_tol:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for j in range(n):
                    ap = A[p, j]
                    aq = A[q, j]
                    A[p, j] = c * ap - s * aq
                    A[q, j] = s * ap + c * aq
                for i in range(n):
                    ap = A[i, p]
                    aq = A[i, q]
                    A[i, p] = c * ap - s * aq
                    A[i, q] = s * ap + c * aq
                A[p, q] = 0.0  # rotated to zero by construction
                A[q, p] = 0.0
                for j in range(n):
                    vp = VT[p, j]
                    vq = VT[q, j]
                    VT[p, j] = c * vp - s * vq
                    VT[q, j] = s * vp + c * vq
        off2 = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off2 += A[i, j] * A[i, j]
        if np.sqrt(off2) <= threshold:
            return sweep + 1
    return -1


def jacobi_eigh(A: np.ndarray, tol: float = JACOBI_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Classic row-cyclic ordering: each sweep visits every pair p < q once
    and rotates rows and columns p, q to zero the pivot. Pivots already
    below tol * norm / (2n) are skipped, which cannot stall convergence
    because even a full matrix of such entries sits under the stopping
    threshold. The rotation loop is compiled (numba) since the pure-Python
    form is orders of magnitude too slow past a few hundred rows.

    Stops when the off-diagonal Frobenius norm falls below tol relative to
    the input norm; raises NumericalError at the sweep cap. Returns
    unsorted eigenvalues and the matching eigenvector columns.
    """
    A = np.array(A, dtype=np.float64, order="C")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    n = A.shape[0]
    if n == 1:
        return np.diag(A).copy(), np.eye(n)
    scale = float(np.linalg.norm(A))
    if scale == 0.0:
        return np.zeros(n), np.eye(n)
    threshold = tol * scale
    if _off_norm(A) <= threshold:
        return np.diag(A).copy(), np.eye(n)
    VT = np.eye(n)
    swept = _jacobi_sweeps(A, VT, threshold, threshold / (2.0 * n), max_sweeps)
    if swept < 0:
        raise NumericalError(f"eigensolver did not converge within {max_sweeps} sweeps")
    return np.diag(A).copy(), VT.T.copy()


def _descending_order(eigenvalues: np.ndarray) -> list[int]:
    # descending, with near-ties (within EIG_TIE_TOL) kept in original
    # column order for reproducibility
    order = sorted(range(eigenvalues.size), key=lambda i: (-eigenvalues[i], i))
    out: list[int] = []
    group = [order[0]]
    for idx in order[1:]:
        if eigenvalues[group[-1]] - eigenvalues[idx] <= EIG_TIE_TOL:
            group.append(idx)
        else:
            out.extend(sorted(group))
            group = [idx]
    out.extend(sorted(group))
    return out


def _fix_signs(U: np.ndarray) -> np.ndarray:
    for j in range(U.shape[1]):
        k = int(np.argmax(np.abs(U[:, j])))
        if U[k, j] < 0.0:
            U[:, j] = -U[:, j]
    return U


@dataclass
class PcaModel:
    """Fitted reduction: standardization, projection columns, spectrum."""

    standardization: StandardizationParams
    projection: np.ndarray      # n_dims x m, orthonormal columns
    eigenvalues: np.ndarray     # length m, descending
    total_variance: float
    threshold: float
    m: int

    def __post_init__(self):
        if self.projection.ndim != 2 or self.projection.shape[1] != self.m:
            raise ValueError("projection shape does not match m")
        if self.eigenvalues.shape != (self.m,):
            raise ValueError("eigenvalue count does not match m")

    @property
    def n_dims(self) -> int:
        return self.projection.shape[0]

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        return self.eigenvalues / self.total_variance

    @property
    def retained_variance(self) -> float:
        return float(self.eigenvalues.sum() / self.total_variance)


def fit_pca(X_std: np.ndarray, threshold: float,
            standardization: StandardizationParams | None = None,
            path: str = "auto") -> PcaModel:
    """Fit a PCA model on an already standardized matrix.

    threshold in (0, 1] is the cumulative explained variance target; m is
    the smallest count reaching it. path selects the eigenproblem route:
    "covariance" (d x d), "gram" (n x n, for d > n), or "auto".
    """
    X = np.asarray(X_std, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("expected a 2-D matrix")
    n, d = X.shape
    if n < 2:
        raise DataError(f"need at least 2 rows, got {n}")
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if path not in ("auto", "covariance", "gram"):
        raise ValueError(f"unknown path {path!r}")
    if path == "auto":
        path = "covariance" if d <= n else "gram"

    if path == "covariance":
        C = (X.T @ X) / n
        total = float(np.trace(C))
        if total <= 0.0:
            raise DataError("total variance is zero")
        w, U = jacobi_eigh(C)
    else:
        G = (X @ X.T) / n
        total = float(np.trace(G))
        if total <= 0.0:
            raise DataError("total variance is zero")
        w, Vg = jacobi_eigh(G)

    if w.min() < -EIG_TIE_TOL * max(1.0, total):
        raise NumericalError(f"covariance eigenvalue {w.min()} is negative")
    w = np.maximum(w, 0.0)
    order = _descending_order(w)
    ordered = w[order]
    cev = np.cumsum(ordered) / total
    reached = np.flatnonzero(cev >= threshold - 1e-12)
    m = int(reached[0]) + 1 if reached.size else ordered.size

    keep = order[:m]
    if path == "covariance":
        proj = U[:, keep].copy()
    else:
        proj = X.T @ Vg[:, keep]
        norms = np.linalg.norm(proj, axis=0)
        if (norms == 0.0).any():
            raise NumericalError("cannot map a zero-variance Gram eigenvector")
        proj /= norms
    proj = _fix_signs(proj)

    if standardization is None:
        standardization = identity_standardization(d)
    if standardization.means.size != d:
        raise DataError(f"standardization covers {standardization.means.size} "
                        f"columns, data has {d}")
    return PcaModel(standardization, proj, ordered[:m].copy(), total,
                    float(threshold), m)


def transform(model: PcaModel, X: np.ndarray) -> np.ndarray:
    """Standardize with the stored parameters and project onto m components."""
    return model.standardization.apply(X) @ model.projection


def pca_model_to_dict(model: PcaModel) -> dict:
    return {
        "means": model.standardization.means.tolist(),
        "scales": model.standardization.scales.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "projection": model.projection.tolist(),
        "m": model.m,
        "threshold": model.threshold,
        "total_variance": model.total_variance,
    }


def pca_model_from_dict(doc: dict) -> PcaModel:
    try:
        params = StandardizationParams(np.asarray(doc["means"], dtype=np.float64),
                                       np.asarray(doc["scales"], dtype=np.float64))
        return PcaModel(params,
                        np.asarray(doc["projection"], dtype=np.float64),
                        np.asarray(doc["eigenvalues"], dtype=np.float64),
                        float(doc["total_variance"]),
                        float(doc["threshold"]),
                        int(doc["m"]))
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed model document: {e}") from e


def save_pca_model(model: PcaModel, path: str) -> None:
    # json emits shortest round-trip float reprs, so reload is exact
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pca_model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_pca_model(path: str) -> PcaModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: invalid JSON: {e}") from e
    return pca_model_from_dict(doc)
