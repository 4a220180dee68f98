"""Robust self-learning loop: alternate orthogonal mapping and dictionary induction.

Each iteration solves the orthogonal Procrustes problem for the current
dictionary, then induces a new dictionary from the mapped spaces. Induction
can be made stochastic (random score dropping with an annealed keep
probability), hubness-corrected (CSLS retrieval) and bidirectional; those
three switches are what lets the loop escape the poor local optima that
plain alternation falls into when the seed dictionary is weak.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import vecmath

logger = logging.getLogger(__name__)

# Row blocking for induction-time similarity products. Fixed (not
# user-tunable) because the stochastic mask is drawn per block: a constant
# block size keeps the random stream identical across code paths.
_INDUCE_BLOCK_ROWS = 1024

# Cache the full similarity matrix when it has at most this many entries
# (64 MB in float64); above it, fall back to the blocked two-pass scheme.
_FULL_MATRIX_MAX_ENTRIES = 8_000_000

_MAX_INDUCTION_RETRIES = 1000


class EmptyInductionError(RuntimeError):
    """Raised when stochastic dropping wiped out every candidate pair."""


@dataclass(frozen=True)
class Dictionary:
    """Sparse translation dictionary as parallel (source, target) index arrays.

    Duplicate pairs are allowed and act as weight-2 entries after
    bidirectional concatenation.
    """

    src: np.ndarray
    tgt: np.ndarray

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int32)
        tgt = np.asarray(self.tgt, dtype=np.int32)
        if src.ndim != 1 or src.shape != tgt.shape:
            raise ValueError("src and tgt must be 1-d arrays of equal length")
        if src.size == 0:
            raise ValueError("dictionary must contain at least one entry")
        if src.min() < 0 or tgt.min() < 0:
            raise ValueError("negative index in dictionary")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "tgt", tgt)
        src.setflags(write=False)
        tgt.setflags(write=False)

    @classmethod
    def from_pairs(cls, pairs) -> "Dictionary":
        arr = np.asarray(list(pairs), dtype=np.int32)
        return cls(src=arr[:, 0], tgt=arr[:, 1])

    @property
    def entries(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.tgt.tolist()))

    def __len__(self) -> int:
        return int(self.src.size)


@dataclass(frozen=True)
class SelfLearnConfig:
    """Hyperparameters of the self-learning loop (defaults as published)."""

    keep_prob_initial: float = 0.1
    keep_prob_growth: float = 2.0
    stall_tolerance: float = 1e-6
    stall_patience: int = 50
    vocab_cutoff: int = 20000
    csls_k: int = 10
    bidirectional: bool = True
    stochastic: bool = True
    retrieval: str = "csls"  # "csls" or "nn"
    max_iterations: int = 10000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.keep_prob_initial <= 1.0:
            raise ValueError("keep_prob_initial must be in (0, 1]")
        if self.keep_prob_growth <= 1.0:
            raise ValueError("keep_prob_growth must be > 1")
        if self.stall_patience < 1 or self.vocab_cutoff < 1 or self.csls_k < 1:
            raise ValueError("stall_patience, vocab_cutoff and csls_k must be positive")
        if self.retrieval not in ("csls", "nn"):
            raise ValueError(f"unknown retrieval mode {self.retrieval!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class MappingPair:
    """Linear transformations applied to source and target embeddings."""

    wx: np.ndarray
    wz: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "MappingPair":
        eye = np.eye(dim, dtype=np.float32)
        return cls(wx=eye, wz=eye.copy())


@dataclass
class LoopState:
    """Progress record of one self-learning run."""

    iterations: int = 0
    keep_prob: float = 0.0
    best_objective: float = float("-inf")
    stall_count: int = 0
    objective_trace: list[float] = field(default_factory=list)
    converged: bool = False
    hit_max_iterations: bool = False


def procrustes(x: np.ndarray, z: np.ndarray, d: Dictionary) -> tuple[MappingPair, float]:
    """Optimal orthogonal mappings for the given dictionary, plus the objective.

    Builds the cross-covariance of the dictionary-aligned rows (entries with
    multiplicity m contribute m times), factorizes it, and returns the two
    rotation matrices together with the achieved objective, the sum of
    singular values = sum over entries of the mapped-pair dot products.
    """
    if len(d) == 0:
        raise ValueError("empty dictionary")
    if d.src.max() >= x.shape[0] or d.tgt.max() >= z.shape[0]:
        raise ValueError("dictionary index out of range")
    a = x[d.src].astype(np.float64).T @ z[d.tgt].astype(np.float64)
    res = vecmath.svd(a)
    wx = res.u.astype(np.float32)
    wz = res.vt.T.astype(np.float32)
    return MappingPair(wx=wx, wz=wz), float(res.s.sum())


@njit(cache=True)
def _topk_mean_rows_nb(sims, k):
    """Mean of the k largest values in each row, single pass per row."""
    n, m = sims.shape
    out = np.empty(n, dtype=np.float64)
    buf = np.empty(k, dtype=np.float64)
    for i in range(n):
        count = 0
        min_val = np.inf
        min_pos = 0
        for j in range(m):
            v = sims[i, j]
            if count < k:
                buf[count] = v
                count += 1
                if count == k:
                    min_val = buf[0]
                    min_pos = 0
                    for t in range(1, k):
                        if buf[t] < min_val:
                            min_val = buf[t]
                            min_pos = t
            elif v > min_val:
                buf[min_pos] = v
                min_val = buf[0]
                min_pos = 0
                for t in range(1, k):
                    if buf[t] < min_val:
                        min_val = buf[t]
                        min_pos = t
        total = 0.0
        for t in range(count):
            total += buf[t]
        out[i] = total / count
    return out


@njit(cache=True)
def _topk_mean_cols_nb(sims, k):
    """Column-wise variant of _topk_mean_rows_nb, scanned in row-major order."""
    n, m = sims.shape
    kk = min(k, n)
    bufs = np.empty((m, kk), dtype=np.float64)
    counts = np.zeros(m, dtype=np.int64)
    min_vals = np.full(m, np.inf)
    min_pos = np.zeros(m, dtype=np.int64)
    for i in range(n):
        for j in range(m):
            v = sims[i, j]
            c = counts[j]
            if c < kk:
                bufs[j, c] = v
                counts[j] = c + 1
                if c + 1 == kk:
                    mv = bufs[j, 0]
                    mp = 0
                    for t in range(1, kk):
                        if bufs[j, t] < mv:
                            mv = bufs[j, t]
                            mp = t
                    min_vals[j] = mv
                    min_pos[j] = mp
            elif v > min_vals[j]:
                bufs[j, min_pos[j]] = v
                mv = bufs[j, 0]
                mp = 0
                for t in range(1, kk):
                    if bufs[j, t] < mv:
                        mv = bufs[j, t]
                        mp = t
                min_vals[j] = mv
                min_pos[j] = mp
    out = np.empty(m, dtype=np.float64)
    for j in range(m):
        total = 0.0
        for t in range(counts[j]):
            total += bufs[j, t]
        out[j] = total / counts[j]
    return out


@njit(cache=True)
def _retrieve_rows_nb(scores, r_rows, r_cols, use_csls):
    """Per-row argmax of (optionally CSLS-corrected) scores; first max wins."""
    rows, m = scores.shape
    idx = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        best = -np.inf
        best_j = 0
        for j in range(m):
            v = scores[i, j]
            if use_csls:
                v = 2.0 * v - r_rows[i] - r_cols[j]
            if v > best:
                best = v
                best_j = j
        idx[i] = best_j
    return idx


@njit(cache=True)
def _retrieve_rows_masked_nb(scores, r_rows, r_cols, use_csls, keep):
    """Row argmax over surviving entries only; rows with no survivor report ok=False."""
    rows, m = scores.shape
    idx = np.zeros(rows, dtype=np.int64)
    ok = np.zeros(rows, dtype=np.bool_)
    for i in range(rows):
        best = -np.inf
        best_j = -1
        for j in range(m):
            if keep[i, j]:
                v = scores[i, j]
                if use_csls:
                    v = 2.0 * v - r_rows[i] - r_cols[j]
                if v > best:
                    best = v
                    best_j = j
        if best_j >= 0:
            idx[i] = best_j
            ok[i] = True
    return idx, ok


@njit(cache=True)
def _retrieve_cols_nb(slab, r_rows, r_cols, use_csls):
    """Per-column argmax of a score slab, scanned row-major; first max wins."""
    n, cols = slab.shape
    best = np.full(cols, -np.inf)
    idx = np.zeros(cols, dtype=np.int64)
    for i in range(n):
        for j in range(cols):
            v = slab[i, j]
            if use_csls:
                v = 2.0 * v - r_cols[j] - r_rows[i]
            if v > best[j]:
                best[j] = v
                idx[j] = i
    return idx


@njit(cache=True)
def _retrieve_cols_masked_nb(slab, r_rows, r_cols, use_csls, keep_t):
    """Masked per-column argmax; keep_t is the survival mask transposed to (n, cols)."""
    n, cols = slab.shape
    best = np.full(cols, -np.inf)
    idx = np.zeros(cols, dtype=np.int64)
    ok = np.zeros(cols, dtype=np.bool_)
    for i in range(n):
        for j in range(cols):
            if keep_t[i, j]:
                v = slab[i, j]
                if use_csls:
                    v = 2.0 * v - r_cols[j] - r_rows[i]
                if v > best[j]:
                    best[j] = v
                    idx[j] = i
                    ok[j] = True
    return idx, ok


def csls_knn_means(src: np.ndarray, tgt: np.ndarray, k: int,
                   block_rows: int = _INDUCE_BLOCK_ROWS) -> np.ndarray:
    """Mean of each source row's k largest dot products against target rows.

    With unit-norm rows this is the average cosine similarity to the k
    nearest neighbors, the local hub penalty used by CSLS retrieval.
    """
    if not 1 <= k <= tgt.shape[0]:
        raise ValueError(f"k={k} out of range for {tgt.shape[0]} target rows")
    n = src.shape[0]
    out = np.empty(n, dtype=np.float64)
    tgt64 = np.ascontiguousarray(tgt, dtype=np.float64)
    for lo in range(0, n, block_rows):
        hi = min(lo + block_rows, n)
        sims = src[lo:hi].astype(np.float64, copy=False) @ tgt64.T
        out[lo:hi] = _topk_mean_rows_nb(sims, k)
    return out


def _induce_rows(a, b, r_a, r_b, use_csls, stochastic, p, rng, sims=None):
    """Argmax retrieval from every row of ``a`` into the rows of ``b``.

    Returns (kept source indices, chosen target indices). When stochastic,
    each candidate score survives independently with probability ``p``;
    dropped scores are excluded from the argmax and rows with no survivor
    are skipped. ``sims`` may carry the precomputed raw similarity matrix
    (corrections are applied on the fly inside the kernels).
    """
    n, m = a.shape[0], b.shape[0]
    r_a = np.zeros(n) if r_a is None else r_a
    r_b = np.zeros(m) if r_b is None else r_b
    b64 = None if sims is not None else np.ascontiguousarray(b, dtype=np.float64)
    srcs, tgts = [], []
    for lo in range(0, n, _INDUCE_BLOCK_ROWS):
        hi = min(lo + _INDUCE_BLOCK_ROWS, n)
        if sims is not None:
            scores = sims[lo:hi]
        else:
            scores = a[lo:hi].astype(np.float64, copy=False) @ b64.T
        if stochastic:
            keep = rng.random((hi - lo, m), dtype=np.float32) < p
            idx, ok = _retrieve_rows_masked_nb(scores, r_a[lo:hi], r_b,
                                               use_csls, keep)
            srcs.append(np.flatnonzero(ok).astype(np.int64) + lo)
            tgts.append(idx[ok])
        else:
            idx = _retrieve_rows_nb(scores, r_a[lo:hi], r_b, use_csls)
            srcs.append(np.arange(lo, hi, dtype=np.int64))
            tgts.append(idx)
    return np.concatenate(srcs), np.concatenate(tgts)


def _induce_cols(sims, r_rows, r_cols, use_csls, stochastic, p, rng):
    """Reverse-direction retrieval over a precomputed similarity matrix.

    Treats each column of ``sims`` as a query into the rows, so the matrix
    product is shared between both induction directions. Returns (chosen
    row indices, kept column indices).
    """
    n, m = sims.shape
    r_rows = np.zeros(n) if r_rows is None else r_rows
    r_cols = np.zeros(m) if r_cols is None else r_cols
    rows_out, cols_out = [], []
    for lo in range(0, m, _INDUCE_BLOCK_ROWS):
        hi = min(lo + _INDUCE_BLOCK_ROWS, m)
        slab = sims[:, lo:hi]
        if stochastic:
            keep = rng.random((hi - lo, n), dtype=np.float32) < p
            keep_t = np.ascontiguousarray(keep.T)
            idx, ok = _retrieve_cols_masked_nb(slab, r_rows, r_cols[lo:hi],
                                               use_csls, keep_t)
            rows_out.append(idx[ok])
            cols_out.append(np.flatnonzero(ok).astype(np.int64) + lo)
        else:
            idx = _retrieve_cols_nb(slab, r_rows, r_cols[lo:hi], use_csls)
            rows_out.append(idx)
            cols_out.append(np.arange(lo, hi, dtype=np.int64))
    return np.concatenate(rows_out), np.concatenate(cols_out)


def induce_dictionary(x_mapped: np.ndarray, z_mapped: np.ndarray,
                      cfg: SelfLearnConfig, p: float,
                      rng: np.random.Generator | None = None) -> Dictionary:
    """One dictionary induction step over mapped, unit-norm embeddings.

    Retrieval follows ``cfg.retrieval``: plain nearest neighbor on cosine
    scores, or CSLS-corrected scores 2*cos(x, y) - r_t(x) - r_s(y) with the
    k-nearest-neighbor means as the local penalties. Random dropping is
    applied after the correction. With ``cfg.bidirectional`` the source->target
    and target->source inductions are concatenated, so a pair found in both
    directions counts twice.

    Small instances materialize the similarity matrix once and share it
    between both directions (the CSLS correction is symmetric); larger ones
    fall back to blocked products so the full matrix never exists in
    memory. Either way the stochastic mask is drawn in fixed row-block
    order from the supplied generator, so a given seed yields the same
    dictionary regardless of thread count.

    Raises EmptyInductionError if dropping removed every candidate in both
    directions; the caller is expected to retry with fresh randomness.
    """
    n, m = x_mapped.shape[0], z_mapped.shape[0]
    if n == 0 or m == 0:
        raise ValueError("empty input matrix")
    if x_mapped.shape[1] != z_mapped.shape[1]:
        raise ValueError("dimension mismatch between mapped spaces")
    stochastic = bool(cfg.stochastic) and p < 1.0
    if stochastic and rng is None:
        raise ValueError("stochastic induction requires a random generator")
    use_csls = cfg.retrieval == "csls"
    if use_csls and (cfg.csls_k > m or cfg.csls_k > n):
        raise ValueError(f"csls_k={cfg.csls_k} out of range")

    sims = None
    r_xz = r_zx = None
    if n * m <= _FULL_MATRIX_MAX_ENTRIES:
        sims = x_mapped.astype(np.float64, copy=False) @ z_mapped.astype(np.float64, copy=False).T
        sims = np.ascontiguousarray(sims)
        if use_csls:
            r_xz = _topk_mean_rows_nb(sims, cfg.csls_k)
            r_zx = _topk_mean_cols_nb(sims, cfg.csls_k)
    elif use_csls:
        r_xz = csls_knn_means(x_mapped, z_mapped, cfg.csls_k)
        r_zx = csls_knn_means(z_mapped, x_mapped, cfg.csls_k)

    src, tgt = _induce_rows(x_mapped, z_mapped, r_xz, r_zx,
                            use_csls, stochastic, p, rng, sims=sims)
    if cfg.bidirectional:
        if sims is not None:
            rev_x_idx, rev_z_idx = _induce_cols(sims, r_xz, r_zx,
                                                use_csls, stochastic, p, rng)
        else:
            rev_z_idx, rev_x_idx = _induce_rows(z_mapped, x_mapped, r_zx, r_xz,
                                                use_csls, stochastic, p, rng)
        src = np.concatenate([src, rev_x_idx])
        tgt = np.concatenate([tgt, rev_z_idx])
    if src.size == 0:
        raise EmptyInductionError("all candidate scores were dropped")
    return Dictionary(src=src, tgt=tgt)


def _induce_with_retry(xm, zm, cfg, p, rng) -> Dictionary:
    for attempt in range(_MAX_INDUCTION_RETRIES):
        try:
            return induce_dictionary(xm, zm, cfg, p, rng)
        except EmptyInductionError:
            logger.debug("empty induction at p=%.4g, retry %d", p, attempt + 1)
    raise EmptyInductionError(
        f"induction stayed empty after {_MAX_INDUCTION_RETRIES} retries at p={p}")


def self_learn(x, z, d0: Dictionary, cfg: SelfLearnConfig
               ) -> tuple[MappingPair, Dictionary, LoopState]:
    """Run the full self-learning loop from a seed dictionary.

    ``x`` and ``z`` are normalized embeddings (objects with a ``vectors``
    matrix, or plain matrices). Induction is restricted to the
    ``cfg.vocab_cutoff`` most frequent words per side. The recorded
    objective is the mean mapped-pair similarity (Procrustes objective
    divided by the entry count), which keeps the stall tolerance comparable
    across dictionaries of different sizes.

    Annealing: whenever the objective fails to improve on the best seen by
    more than ``stall_tolerance`` for ``stall_patience`` consecutive
    iterations, the keep probability grows by ``keep_prob_growth`` (capped
    at 1); once it has reached 1, the next such stall stops the loop. After
    the loop, the dictionary is re-induced deterministically from the last
    mapping and the mapping is re-fit on it once, so results are
    reproducible even when the iteration cap cut the loop short.
    """
    xv = x.vectors if hasattr(x, "vectors") else np.asarray(x)
    zv = z.vectors if hasattr(z, "vectors") else np.asarray(z)
    cut_x = min(cfg.vocab_cutoff, xv.shape[0])
    cut_z = min(cfg.vocab_cutoff, zv.shape[0])
    xc, zc = xv[:cut_x], zv[:cut_z]
    if len(d0) == 0:
        raise ValueError("seed dictionary is empty")
    if d0.src.max() >= cut_x or d0.tgt.max() >= cut_z:
        raise ValueError("seed dictionary index beyond the vocabulary cutoff")

    rng = np.random.default_rng(cfg.seed)
    state = LoopState(keep_prob=cfg.keep_prob_initial)
    d = d0
    mapping = None
    p = cfg.keep_prob_initial
    best = float("-inf")
    stall = 0

    while state.iterations < cfg.max_iterations:
        mapping, obj_sum = procrustes(xc, zc, d)
        obj = obj_sum / len(d)
        state.objective_trace.append(obj)
        state.iterations += 1
        if obj - best > cfg.stall_tolerance:
            best = max(best, obj)
            stall = 0
        else:
            best = max(best, obj)
            stall += 1
            if stall >= cfg.stall_patience:
                if p >= 1.0:
                    state.converged = True
                    break
                p = min(1.0, p * cfg.keep_prob_growth)
                stall = 0
                logger.debug("iteration %d: keep probability -> %.4g",
                             state.iterations, p)
        d = _induce_with_retry(xc @ mapping.wx, zc @ mapping.wz, cfg, p, rng)
    else:
        state.hit_max_iterations = True

    # Deterministic re-fit: induce once without dropping, then re-solve.
    d = induce_dictionary(xc @ mapping.wx, zc @ mapping.wz, cfg, p=1.0)
    mapping, obj_sum = procrustes(xc, zc, d)
    obj = obj_sum / len(d)
    state.objective_trace.append(obj)
    best = max(best, obj)
    state.best_objective = best
    state.keep_prob = p
    state.stall_count = stall
    return mapping, d, state
