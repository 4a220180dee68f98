"""Final symmetric re-weighting of the converged mapping.

Whitens both sides, re-solves the alignment there, scales the shared
dimensions by the square root of the singular values (splitting the
re-weighting evenly between source and target, so the result does not
depend on the mapping direction), and de-whitens. Runs exactly once after
self-learning has converged; inside the loop it would over-commit to the
current solution and hurt exploration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vecmath
from .selflearn import Dictionary


@dataclass(frozen=True)
class RefinementFactors:
    """The individual transforms whose product gives the refined mapping."""

    whiten_x: np.ndarray
    whiten_z: np.ndarray
    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    dewhiten_x: np.ndarray
    dewhiten_z: np.ndarray

    def compose(self) -> tuple[np.ndarray, np.ndarray]:
        """Recombine the factor chain into the (wx, wz) matrices."""
        sqrt_s = np.sqrt(np.maximum(self.s, 0.0))
        wx = self.whiten_x @ (self.u * sqrt_s) @ self.dewhiten_x
        wz = self.whiten_z @ (self.vt.T * sqrt_s) @ self.dewhiten_z
        return wx, wz


@dataclass(frozen=True)
class RefinedMapping:
    """Re-weighted (generally non-orthogonal) mapping pair with provenance."""

    wx: np.ndarray
    wz: np.ndarray
    provenance: RefinementFactors


def symmetric_reweight(x: np.ndarray, z: np.ndarray, d: Dictionary) -> RefinedMapping:
    """Re-weight the mapping for a converged dictionary.

    ``x`` and ``z`` are the normalized embedding matrices restricted to the
    same cutoff vocabularies the dictionary was induced from; their Gram
    matrices drive both whitening and de-whitening.
    """
    if d.src.max() >= x.shape[0] or d.tgt.max() >= z.shape[0]:
        raise ValueError("dictionary index out of range")
    x64 = x.astype(np.float64, copy=False)
    z64 = z.astype(np.float64, copy=False)

    whiten_x = vecmath.whiten_transform(x64)
    whiten_z = vecmath.whiten_transform(z64)
    xw = x64 @ whiten_x
    zw = z64 @ whiten_z

    res = vecmath.svd(xw[d.src].T @ zw[d.tgt])
    u, s, vt = res.u, res.s, res.vt

    sqrt_gram_x = vecmath.matrix_sqrt_psd(x64.T @ x64)
    sqrt_gram_z = vecmath.matrix_sqrt_psd(z64.T @ z64)
    dewhiten_x = u.T @ sqrt_gram_x @ u
    dewhiten_z = vt @ sqrt_gram_z @ vt.T

    factors = RefinementFactors(
        whiten_x=whiten_x, whiten_z=whiten_z, u=u, s=s, vt=vt,
        dewhiten_x=dewhiten_x, dewhiten_z=dewhiten_z)
    wx, wz = factors.compose()
    return RefinedMapping(
        wx=wx.astype(np.float32), wz=wz.astype(np.float32), provenance=factors)
