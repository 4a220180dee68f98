"""End-to-end mapping pipeline: normalize, initialize, self-learn, re-weight."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from . import vecmath
from .embedio import Embedding
from .initsol import InitConfig, build_initial_dictionary
from .refine import RefinedMapping, symmetric_reweight
from .selflearn import Dictionary, LoopState, MappingPair, SelfLearnConfig, self_learn


@dataclass(frozen=True)
class PipelineConfig:
    """Configuration of one full mapping run."""

    init: InitConfig = InitConfig()
    selflearn: SelfLearnConfig = SelfLearnConfig()
    reweight: bool = True
    use_unsup_init: bool = True

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, selflearn=replace(self.selflearn, seed=seed))


@dataclass
class PipelineResult:
    """Everything produced by one run, including the pre-refinement mapping."""

    x_norm: Embedding
    z_norm: Embedding
    init_dictionary: Dictionary
    selflearn_mapping: MappingPair
    refined_mapping: RefinedMapping | None
    dictionary: Dictionary
    loop_state: LoopState
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def final_mapping(self):
        return self.refined_mapping if self.refined_mapping is not None else self.selflearn_mapping


def run_pipeline(x: Embedding, z: Embedding, cfg: PipelineConfig = PipelineConfig(),
                 seed_dictionary: Dictionary | None = None) -> PipelineResult:
    """Learn a mapping between two raw (unnormalized) embedding spaces.

    With ``cfg.use_unsup_init`` the seed dictionary comes from the
    similarity-profile initializer; otherwise ``seed_dictionary`` must be
    supplied (its indices refer to frequency ranks within the vocabulary
    cutoff).
    """
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    x_norm = Embedding(words=x.words, vectors=vecmath.normalize(x.vectors))
    z_norm = Embedding(words=z.words, vectors=vecmath.normalize(z.vectors))
    timings["normalize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if cfg.use_unsup_init:
        d0 = build_initial_dictionary(x_norm, z_norm, cfg.init)
    else:
        if seed_dictionary is None:
            raise ValueError("seed_dictionary is required when use_unsup_init is off")
        d0 = seed_dictionary
    timings["init"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mapping, d, state = self_learn(x_norm, z_norm, d0, cfg.selflearn)
    timings["self_learn"] = time.perf_counter() - t0

    refined = None
    if cfg.reweight:
        t0 = time.perf_counter()
        cut_x = min(cfg.selflearn.vocab_cutoff, len(x_norm))
        cut_z = min(cfg.selflearn.vocab_cutoff, len(z_norm))
        refined = symmetric_reweight(
            x_norm.vectors[:cut_x], z_norm.vectors[:cut_z], d)
        timings["reweight"] = time.perf_counter() - t0
    timings["total"] = sum(timings.values())

    return PipelineResult(
        x_norm=x_norm, z_norm=z_norm, init_dictionary=d0,
        selflearn_mapping=mapping, refined_mapping=refined,
        dictionary=d, loop_state=state, timings=timings)
