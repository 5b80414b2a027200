"""Deterministic PCA over the vocabulary's raw visual vectors.

Covariance uses the N-1 divisor; components come from a dense symmetric
eigendecomposition of the D x D covariance, sorted by eigenvalue descending
with ties broken by lowest eigen-index.  Eigenvector sign is fixed so each
component's largest-magnitude entry is positive (first such entry on exact
magnitude ties), making fits bit-reproducible.  All arithmetic is double
precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray        # (D,)
    components: np.ndarray  # (k, D), rows orthonormal
    variances: np.ndarray   # (k,), nonincreasing, >= 0

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def output_dim(self) -> int:
        return self.components.shape[0]

    def transform(self, v: np.ndarray) -> np.ndarray:
        """Project a (D,) vector or (N, D) matrix onto the components."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.input_dim:
            raise ValueError(
                f"input dim {v.shape[-1]} does not match model dim {self.input_dim}"
            )
        if not np.isfinite(v).all():
            raise ValueError("input contains non-finite values")
        return (v - self.mean) @ self.components.T

    def explained_variance_ratio(self) -> np.ndarray:
        """Per-component share of total variance; all zeros if total is 0."""
        total = float(self.variances.sum())
        if total <= 0.0:
            return np.zeros_like(self.variances)
        return self.variances / total


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # make each row's largest-|entry| positive; ties resolved by lowest index
    out = components.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return out


def fit(data: np.ndarray, k: int) -> PCAModel:
    """Fit PCA on an (N, D) matrix, keeping the top-k components."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("data must be a 2-D (N, D) matrix")
    n, d = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if not (1 <= k <= d):
        raise ValueError(f"k={k} must be in [1, {d}]")
    if not np.isfinite(x).all():
        raise ValueError("data contains non-finite values")

    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending
    order = np.argsort(-eigvals, kind="stable")[:k]
    variances = np.maximum(eigvals[order], 0.0)
    components = _fix_signs(eigvecs[:, order].T)
    return PCAModel(mean=mean, components=components, variances=variances)
