"""Independent brute-force oracles used to check the library implementations.

Everything here is written the slow, obvious way on purpose: full matrices,
plain sorts and explicit loops, no shared code with the package internals.
"""
import numpy as np


def naive_similarity(a, b):
    """Full similarity matrix via an explicit per-entry double-precision loop."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i, j] = float(np.dot(a[i], b[j]))
    return out


def naive_knn_means(src, tgt, k):
    """Mean of the k largest similarities per source row, via a full sort."""
    sims = naive_similarity(src, tgt)
    out = np.empty(src.shape[0])
    for i in range(src.shape[0]):
        row = np.sort(sims[i])[::-1]
        out[i] = row[:k].mean()
    return out


def naive_csls_matrix(x, z, k):
    """Dense CSLS-corrected score matrix, 2*cos - r_t(x) - r_s(y)."""
    sims = naive_similarity(x, z)
    r_t = naive_knn_means(x, z, k)
    r_s = naive_knn_means(z, x, k)
    out = np.empty_like(sims)
    for i in range(x.shape[0]):
        for j in range(z.shape[0]):
            out[i, j] = 2.0 * sims[i, j] - r_t[i] - r_s[j]
    return out


def naive_argmax_lowest_tie(row):
    """Argmax that keeps the lowest index on exact ties."""
    best, best_j = -np.inf, -1
    for j, v in enumerate(row):
        if v > best:
            best, best_j = v, j
    return best_j


def naive_induction(x, z, k=None, bidirectional=True):
    """Deterministic dictionary induction oracle (CSLS when k is given)."""
    scores = naive_csls_matrix(x, z, k) if k is not None else naive_similarity(x, z)
    pairs = []
    for i in range(x.shape[0]):
        pairs.append((i, naive_argmax_lowest_tie(scores[i])))
    if bidirectional:
        rev = naive_csls_matrix(z, x, k) if k is not None else naive_similarity(z, x)
        for j in range(z.shape[0]):
            pairs.append((naive_argmax_lowest_tie(rev[j]), j))
    return pairs


def random_orthogonal(dim, rng):
    """QR-based random orthogonal matrix (independent of the library helper)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def unit_rows(m):
    m = np.asarray(m, dtype=np.float64)
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def pairs_multiset(dictionary):
    """Dictionary entries as a sorted multiset for order-insensitive compare."""
    return sorted(zip(dictionary.src.tolist(), dictionary.tgt.tolist()))
