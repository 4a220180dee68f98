"""Fully unsupervised construction of the seed dictionary.

The trick: both axes of the intra-language similarity matrix index words,
so sorting each row's values discards the (unknown) word order of the other
axis. Rows of the sorted square-root similarity matrices are then directly
comparable across languages, and a single retrieval pass over them yields a
weak but far-better-than-chance seed dictionary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vecmath
from .selflearn import Dictionary, SelfLearnConfig, induce_dictionary


@dataclass(frozen=True)
class InitConfig:
    """Settings for the unsupervised initializer."""

    vocab_cutoff_init: int = 4000
    use_csls: bool = True
    bidirectional: bool = True
    csls_k: int = 10

    def __post_init__(self):
        if self.vocab_cutoff_init < 2:
            raise ValueError("vocab_cutoff_init must be at least 2")
        if self.csls_k < 1:
            raise ValueError("csls_k must be positive")


def similarity_profile(emb: np.ndarray, cutoff: int) -> np.ndarray:
    """Normalized, row-sorted square root of the intra-language similarity matrix.

    Restricted to the ``cutoff`` most frequent words: compute their mutual
    similarity matrix, take its PSD square root, sort every row in
    descending order, and run the output through the standard normalization
    pipeline. Row i of the result characterizes word i purely by its
    distribution of similarity values, independent of vocabulary order.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    if cutoff > emb.shape[0]:
        raise ValueError(f"cutoff {cutoff} exceeds vocabulary size {emb.shape[0]}")
    e = emb[:cutoff].astype(np.float64, copy=False)
    m = e @ e.T
    root = vecmath.matrix_sqrt_psd(m)
    profile = vecmath.normalize(vecmath.sort_rows_desc(root))
    return profile.astype(np.float32)


def build_initial_dictionary(x, z, cfg: InitConfig = InitConfig()) -> Dictionary:
    """Induce the seed dictionary from the two similarity profiles.

    Runs one deterministic induction pass (no stochastic dropping) over the
    profile matrices with CSLS and bidirectional induction as configured.
    The profiles are used only here and then discarded. Deterministic: same
    inputs always give the same dictionary.

    When the two vocabularies are smaller than the cutoff (or differ in
    size), each profile is truncated to the smaller width so retrieval
    operates in a common dimension; the discarded tail holds the smallest,
    least informative similarities. Truncated rows are re-normalized to
    unit length.
    """
    xv = x.vectors if hasattr(x, "vectors") else np.asarray(x)
    zv = z.vectors if hasattr(z, "vectors") else np.asarray(z)
    cut_x = min(cfg.vocab_cutoff_init, xv.shape[0])
    cut_z = min(cfg.vocab_cutoff_init, zv.shape[0])
    px = similarity_profile(xv, cut_x)
    pz = similarity_profile(zv, cut_z)
    width = min(px.shape[1], pz.shape[1])
    if px.shape[1] != width or pz.shape[1] != width:
        px = vecmath.length_normalize(px[:, :width])
        pz = vecmath.length_normalize(pz[:, :width])

    pass_cfg = SelfLearnConfig(
        retrieval="csls" if cfg.use_csls else "nn",
        csls_k=cfg.csls_k,
        bidirectional=cfg.bidirectional,
        stochastic=False,
    )
    return induce_dictionary(px, pz, pass_cfg, p=1.0)
