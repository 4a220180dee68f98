"""Dense linear algebra kernels shared by the mapping pipeline.

All heavy factorizations (SVD, symmetric eigendecomposition) run in double
precision regardless of the input dtype; results are cast back so that the
embedding matrices themselves can stay in float32.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Default row blocking for similarity products. A 4096 x 20000 float32 block
# stays well under 400 MB, so the full n x m similarity matrix never needs to
# be materialized at realistic vocabulary sizes.
DEFAULT_BLOCK_ROWS = 4096


def length_normalize(m: np.ndarray) -> np.ndarray:
    """Divide each row by its Euclidean norm. Raises on a zero row."""
    norms = np.linalg.norm(np.asarray(m, dtype=np.float64), axis=1)
    if np.any(norms == 0.0):
        row = int(np.flatnonzero(norms == 0.0)[0])
        raise ValueError(f"cannot length-normalize zero row {row}")
    return (m / norms[:, None].astype(m.dtype)).astype(m.dtype, copy=False)


def mean_center(m: np.ndarray) -> np.ndarray:
    """Subtract the per-column mean from each column."""
    means = np.asarray(m, dtype=np.float64).mean(axis=0)
    return (m - means.astype(m.dtype)).astype(m.dtype, copy=False)


def normalize(m: np.ndarray) -> np.ndarray:
    """Length-normalize rows, mean-center columns, length-normalize again.

    The final step guarantees unit rows, so dot products of the output are
    cosine similarities. The input is not modified. Raises if a row is zero
    before the first step or degenerates to zero after centering (e.g. a
    single-row matrix).
    """
    return length_normalize(mean_center(length_normalize(m)))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``u @ diag(s) @ vt`` with nonincreasing singular values."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray


def svd(m: np.ndarray) -> SvdResult:
    """Thin SVD with a deterministic sign convention.

    For each singular pair, the component of largest magnitude in the
    corresponding column of ``u`` is made nonnegative (flipping the matching
    row of ``vt`` along with it), so repeated factorizations of the same
    input produce identical outputs.
    """
    a = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("svd input contains non-finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    flip = u[np.abs(u).argmax(axis=0), np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    vt[flip, :] *= -1.0
    return SvdResult(u=u, s=s, vt=vt)


def similarity_block(a: np.ndarray, b: np.ndarray, rows: tuple[int, int]) -> np.ndarray:
    """Rows ``rows[0]:rows[1]`` of the similarity product ``a @ b.T``.

    Accumulates in double precision and returns float32.
    """
    lo, hi = rows
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if not (0 <= lo < hi <= a.shape[0]):
        raise ValueError(f"bad row range ({lo}, {hi}) for {a.shape[0]} rows")
    prod = a[lo:hi].astype(np.float64) @ b.astype(np.float64).T
    return prod.astype(np.float32)


def matrix_sqrt_psd(m: np.ndarray, asym_tol: float = 1e-4) -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Eigenvalues that come out slightly negative from numerical noise are
    clamped to zero. Raises if the input is asymmetric beyond ``asym_tol``.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_sqrt_psd expects a square matrix")
    if np.max(np.abs(a - a.T)) > asym_tol:
        raise ValueError("matrix is asymmetric beyond tolerance")
    a = (a + a.T) / 2.0
    vals, vecs = np.linalg.eigh(a)
    root = (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.T
    return root.astype(m.dtype, copy=False) if m.dtype != np.float64 else root


def whiten_transform(m: np.ndarray, floor_ratio: float = 1e-12) -> np.ndarray:
    """Inverse square root of the Gram matrix ``m.T @ m``.

    Multiplying ``m`` by the result makes its columns orthonormal (up to the
    conditioning floor). Eigenvalues below ``floor_ratio`` times the largest
    one are clamped to that floor before inversion; raises if even the
    largest eigenvalue is not positive.
    """
    a = np.asarray(m, dtype=np.float64)
    gram = a.T @ a
    gram = (gram + gram.T) / 2.0
    vals, vecs = np.linalg.eigh(gram)
    top = vals[-1]
    if not np.isfinite(top) or top <= 0.0:
        raise ValueError("Gram matrix has no positive eigenvalues")
    vals = np.maximum(vals, floor_ratio * top)
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    return inv_root


def sort_rows_desc(m: np.ndarray) -> np.ndarray:
    """Sort each row independently in descending order."""
    return np.sort(m, axis=1)[:, ::-1].copy()
