"""Neural entrainment distance and the two reproducible baselines."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .neural.checkpoint import Checkpoint
from .neural.network import encode as _encode
from .neural.network import smooth_l1, smooth_l1_elementwise

PCA_COMPONENTS = 10
EIG_REL_TOL = 1e-10


@dataclass
class NedScore:
    value: float
    source: str = ""
    target: str = ""
    session_id: str = ""
    pair_index: int = -1

    @property
    def direction(self) -> str:
        return f"{self.source}->{self.target}"


def encode(checkpoint: Checkpoint, x) -> np.ndarray:
    """Bottleneck embedding(s) of turn-level vector(s), inference mode."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != checkpoint.input_dim:
        raise ValueError(f"vector length {x.shape[-1]} != checkpoint input dimension {checkpoint.input_dim}")
    return _encode(checkpoint.network, x)


def ned(checkpoint: Checkpoint, x_i, x_j, source: str = "", target: str = "") -> NedScore:
    """Smooth-L1 distance between the embeddings of x_i (earlier turn) and x_j."""
    z = encode(checkpoint, np.stack([np.asarray(x_i, float), np.asarray(x_j, float)]))
    return NedScore(smooth_l1(z[0], z[1]), source, target)


def ned_from_embeddings(z_i, z_j) -> np.ndarray:
    """Row-wise smooth-L1 distances between two (n, m) embedding arrays."""
    return np.sum(smooth_l1_elementwise(np.asarray(z_i) - np.asarray(z_j)), axis=-1)


def baseline1(x_i, x_j) -> float:
    """Smooth-L1 distance taken directly between turn-level vectors."""
    x_i = np.asarray(x_i, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    return smooth_l1(x_i, x_j)


@dataclass
class PcaModel:
    mean: np.ndarray
    axes: np.ndarray  # (k, d) orthonormal rows
    explained: np.ndarray  # eigenvalue share per retained axis

    @property
    def k(self) -> int:
        return self.axes.shape[0]

    def project(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) @ self.axes.T


def pca_fit(vectors, k: int = PCA_COMPONENTS) -> PcaModel:
    """Principal axes from the eigendecomposition of the sample covariance.

    Axes with non-positive (numerically zero) eigenvalues are skipped; if
    fewer than ``k`` remain a warning is issued and ``k`` shrinks.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < k + 1:
        raise ValueError(f"PCA with k={k} needs at least {k + 1} vectors, got {X.shape[0] if X.ndim == 2 else 0}")
    mean = X.mean(axis=0)
    C = np.cov(X - mean, rowvar=False)
    C = 0.5 * (C + C.T)
    evals, evecs = np.linalg.eigh(C)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    top = evals[0] if evals.size else 0.0
    usable = evals > max(top, 0.0) * EIG_REL_TOL
    n_pos = int(np.count_nonzero(usable[:k]))
    if n_pos < k:
        warnings.warn(f"covariance has only {n_pos} usable axes; reducing k from {k}", RuntimeWarning, stacklevel=2)
    axes = evecs[:, :k][:, usable[:k]].T
    # sign convention: largest-magnitude loading positive, so refits are stable
    flip = np.sign(axes[np.arange(axes.shape[0]), np.argmax(np.abs(axes), axis=1)])
    axes = axes * flip[:, None]
    total = evals[evals > 0].sum()
    explained = evals[:k][usable[:k]] / total if total > 0 else np.zeros(axes.shape[0])
    return PcaModel(mean, axes, explained)


def baseline2(model: PcaModel, x_i, x_j) -> float:
    """Cosine similarity of the two PCA projections (higher = more similar)."""
    return float(cosine_rows(model.project(x_i)[None, :], model.project(x_j)[None, :])[0])


def cosine_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine similarity; 0 where either row has zero norm."""
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    denom = na * nb
    dots = np.sum(a * b, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
