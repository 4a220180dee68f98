"""Bilingual lexicon extraction evaluation, synthetic benchmarks and reporting."""
from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import initsol, vecmath
from .embedio import Embedding, WordPairList
from .pipeline import PipelineConfig, run_pipeline
from .selflearn import Dictionary, MappingPair, csls_knn_means, procrustes

SUCCESS_THRESHOLD = 0.05  # a run counts as successful above 5% accuracy

_EVAL_BLOCK_ROWS = 1024


@dataclass(frozen=True)
class PairOutcome:
    source: str
    prediction: str
    gold_targets: tuple[str, ...]
    correct: bool


@dataclass(frozen=True)
class EvalResult:
    """Precision@1 of the induced lexicon against a gold dictionary."""

    accuracy: float
    covered: int
    oov: int
    outcomes: tuple[PairOutcome, ...]


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m.astype(np.float64, copy=False), axis=1)
    norms[norms == 0.0] = 1.0  # degenerate mapped rows stay zero instead of NaN
    return (m / norms[:, None]).astype(np.float32)


def evaluate(x: Embedding, z: Embedding, mapping, gold: WordPairList,
             retrieval: str = "csls", csls_k: int = 10) -> EvalResult:
    """Retrieve a translation for every covered gold source word.

    ``x`` and ``z`` must be the embeddings the mapping was trained on (i.e.
    already normalized for a mapping learned on normalized spaces). Mapped
    rows are re-normalized to unit length so scores are cosines even for
    non-orthogonal refined mappings. Retrieval runs over the full target
    vocabulary; a prediction is correct if it matches any gold target for
    its source word. Source words missing from the vocabulary are reported
    as ``oov`` and excluded from the accuracy denominator.
    """
    if len(gold) == 0:
        raise ValueError("empty gold dictionary")
    if retrieval not in ("csls", "nn"):
        raise ValueError(f"unknown retrieval mode {retrieval!r}")
    grouped = gold.targets_by_source
    sources = list(grouped)
    src_index = x.word_index
    covered_words = [w for w in sources if w in src_index]
    oov = len(sources) - len(covered_words)
    if not covered_words:
        raise ValueError("no gold source word is covered by the vocabulary")

    xm = _unit_rows(x.vectors @ mapping.wx)
    zm = _unit_rows(z.vectors @ mapping.wz)
    queries = xm[[src_index[w] for w in covered_words]]

    use_csls = retrieval == "csls"
    if use_csls:
        r_tgt = csls_knn_means(zm, xm, csls_k)
    zm64 = zm.astype(np.float64)
    predicted = np.empty(len(covered_words), dtype=np.int64)
    for lo in range(0, len(covered_words), _EVAL_BLOCK_ROWS):
        hi = min(lo + _EVAL_BLOCK_ROWS, len(covered_words))
        sims = queries[lo:hi].astype(np.float64) @ zm64.T
        if use_csls:
            k = min(csls_k, zm.shape[0])
            r_query = np.partition(sims, sims.shape[1] - k, axis=1)[:, sims.shape[1] - k:].mean(axis=1)
            sims = 2.0 * sims - r_query[:, None] - r_tgt[None, :]
        predicted[lo:hi] = sims.argmax(axis=1)

    outcomes = []
    n_correct = 0
    for word, idx in zip(covered_words, predicted):
        pred_word = z.words[idx]
        ok = pred_word in grouped[word]
        n_correct += ok
        outcomes.append(PairOutcome(
            source=word, prediction=pred_word,
            gold_targets=tuple(sorted(grouped[word])), correct=ok))
    return EvalResult(
        accuracy=n_correct / len(covered_words),
        covered=len(covered_words), oov=oov, outcomes=tuple(outcomes))


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a planted-isometry benchmark instance."""

    n_words: int
    dim: int
    noise_sigma: float = 0.0
    permute: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_words < 1 or self.dim < 1:
            raise ValueError("n_words and dim must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random orthogonal matrix from the QR of a Gaussian."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def generate_synthetic(spec: SynthSpec) -> tuple[Embedding, Embedding, WordPairList]:
    """Source space, target space (rotated/permuted/noised copy), planted gold.

    Target row order realizes the planted permutation, so frequency ranks of
    the target side follow it and cutoff-based stages stay meaningful. With
    ``noise_sigma=0`` and ``permute=False`` the target is exactly the
    rotated source.
    """
    rng = np.random.default_rng(spec.seed)
    n, dim = spec.n_words, spec.dim
    x = rng.standard_normal((n, dim))
    q = random_orthogonal(dim, rng)
    perm = rng.permutation(n) if spec.permute else np.arange(n)
    mapped = x @ q
    if spec.noise_sigma > 0:
        mapped = mapped + spec.noise_sigma * rng.standard_normal((n, dim))
    z = np.empty_like(mapped)
    z[perm] = mapped

    x_emb = Embedding(words=tuple(f"s{i}" for i in range(n)),
                      vectors=x.astype(np.float32))
    z_emb = Embedding(words=tuple(f"t{j}" for j in range(n)),
                      vectors=z.astype(np.float32))
    gold = WordPairList(pairs=tuple((f"s{i}", f"t{perm[i]}") for i in range(n)))
    return x_emb, z_emb, gold


def random_dictionary(n_src: int, n_tgt: int, seed: int) -> Dictionary:
    """One uniformly random target per source row (the random-init baseline)."""
    rng = np.random.default_rng(seed)
    return Dictionary(src=np.arange(n_src, dtype=np.int32),
                      tgt=rng.integers(0, n_tgt, size=n_src).astype(np.int32))


def supervised_procrustes(x_norm: Embedding, z_norm: Embedding,
                          gold: WordPairList) -> MappingPair:
    """Orthogonal mapping fit directly on the gold pairs (upper-bound oracle)."""
    src_index, tgt_index = x_norm.word_index, z_norm.word_index
    pairs = [(src_index[s], tgt_index[t]) for s, t in gold
             if s in src_index and t in tgt_index]
    if not pairs:
        raise ValueError("no gold pair is covered by both vocabularies")
    mapping, _ = procrustes(x_norm.vectors, z_norm.vectors,
                            Dictionary.from_pairs(pairs))
    return mapping


@dataclass
class RunRecord:
    """Outcome of one pipeline run."""

    seed: int
    accuracy: float
    success: bool
    runtime_seconds: float
    iterations: int
    converged: bool
    objective_trace: list[float] = field(default_factory=list)
    error: str | None = None


@dataclass
class RunReport:
    """Aggregate over repeated runs, in the shape of the result tables."""

    runs: list[RunRecord]

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def best(self) -> float:
        return max(r.accuracy for r in self.runs)

    @property
    def average(self) -> float:
        return float(np.mean([r.accuracy for r in self.runs]))

    @property
    def success_count(self) -> int:
        return sum(r.success for r in self.runs)

    @property
    def mean_runtime_seconds(self) -> float:
        return float(np.mean([r.runtime_seconds for r in self.runs]))


def multi_run(x: Embedding, z: Embedding, gold: WordPairList,
              cfg: PipelineConfig, n_runs: int, base_seed: int = 0,
              seed_dictionary: Dictionary | Callable[[int], Dictionary] | None = None,
              retrieval: str = "csls") -> RunReport:
    """Run the pipeline ``n_runs`` times with seeds base_seed..base_seed+n-1.

    Recorded runtime covers the pipeline only (inputs are already in
    memory, and evaluation is excluded). A run that raises is recorded with
    accuracy 0 and its error message; it does not abort the remaining runs.
    ``seed_dictionary`` may be a fixed dictionary or a per-seed factory,
    used when ``cfg.use_unsup_init`` is off.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    runs = []
    for i in range(n_runs):
        seed = base_seed + i
        run_cfg = cfg.with_seed(seed)
        d0 = seed_dictionary(seed) if callable(seed_dictionary) else seed_dictionary
        t0 = time.perf_counter()
        try:
            result = run_pipeline(x, z, run_cfg, seed_dictionary=d0)
            elapsed = time.perf_counter() - t0
            ev = evaluate(result.x_norm, result.z_norm, result.final_mapping,
                          gold, retrieval=retrieval)
            runs.append(RunRecord(
                seed=seed, accuracy=ev.accuracy,
                success=ev.accuracy > SUCCESS_THRESHOLD,
                runtime_seconds=elapsed,
                iterations=result.loop_state.iterations,
                converged=result.loop_state.converged,
                objective_trace=list(result.loop_state.objective_trace)))
        except Exception as exc:  # per-run failures are data, not fatal
            elapsed = time.perf_counter() - t0
            runs.append(RunRecord(
                seed=seed, accuracy=0.0, success=False,
                runtime_seconds=elapsed, iterations=0, converged=False,
                error=f"{type(exc).__name__}: {exc}"))
    return RunReport(runs=runs)


def format_report(report: RunReport) -> str:
    """Human-readable table: best/avg accuracy (%), successes, mean time."""
    lines = [f"{'run':>4} {'seed':>6} {'acc%':>7} {'ok':>3} {'iters':>6} {'time_s':>8}"]
    for i, r in enumerate(report.runs):
        note = f"  ERROR {r.error}" if r.error else ""
        lines.append(f"{i:>4} {r.seed:>6} {100 * r.accuracy:>7.2f} "
                     f"{'y' if r.success else 'n':>3} {r.iterations:>6} "
                     f"{r.runtime_seconds:>8.1f}{note}")
    lines.append(
        f"best {100 * report.best:.2f}%  avg {100 * report.average:.2f}%  "
        f"successful {report.success_count}/{report.n_runs}  "
        f"mean time {report.mean_runtime_seconds:.1f}s")
    return "\n".join(lines)


def report_json_lines(report: RunReport) -> list[str]:
    """One machine-readable JSON record per run."""
    return [json.dumps(asdict(r), sort_keys=True) for r in report.runs]


def export_profile(emb: Embedding, words: list[str], cutoff: int
                   ) -> list[tuple[str, int, float]]:
    """Similarity-value profiles of selected words as (word, rank, value) rows.

    Each requested word contributes ``cutoff`` rows: its full row of the
    normalized sorted square-root similarity matrix, from the largest value
    (rank 0) downward. Useful for plotting the per-word similarity
    distributions that motivate the unsupervised initializer.
    """
    norm = vecmath.normalize(emb.vectors)
    profile = initsol.similarity_profile(norm, cutoff)
    index = emb.word_index
    rows: list[tuple[str, int, float]] = []
    for word in words:
        i = index.get(word)
        if i is None or i >= cutoff:
            raise ValueError(f"word {word!r} is not in the top-{cutoff} vocabulary")
        rows.extend((word, rank, float(v)) for rank, v in enumerate(profile[i]))
    return rows


def write_profile_csv(rows: list[tuple[str, int, float]], writer) -> None:
    """Write profile rows as CSV with a `word,rank,value` header."""
    if isinstance(writer, (str, bytes)) or hasattr(writer, "__fspath__"):
        with open(writer, "w", encoding="utf-8", newline="") as fh:
            write_profile_csv(rows, fh)
        return
    out = csv.writer(writer)
    out.writerow(["word", "rank", "value"])
    out.writerows(rows)
