"""Unsupervised cross-lingual word embedding mapping.

Learns linear transformations placing two independently trained monolingual
embedding spaces into a shared space without any bilingual supervision, and
induces/evaluates a bilingual dictionary from the mapped spaces.
"""
from .embedio import Embedding, WordPairList, load_dictionary, load_embeddings, save_embeddings
from .evalharness import (EvalResult, RunReport, SynthSpec, evaluate,
                          generate_synthetic, multi_run)
from .initsol import InitConfig, build_initial_dictionary, similarity_profile
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .refine import RefinedMapping, symmetric_reweight
from .selflearn import (Dictionary, LoopState, MappingPair, SelfLearnConfig,
                        csls_knn_means, induce_dictionary, procrustes, self_learn)

__version__ = "0.1.0"

__all__ = [
    "Embedding", "WordPairList", "load_embeddings", "save_embeddings",
    "load_dictionary",
    "InitConfig", "similarity_profile", "build_initial_dictionary",
    "Dictionary", "SelfLearnConfig", "MappingPair", "LoopState",
    "procrustes", "csls_knn_means", "induce_dictionary", "self_learn",
    "RefinedMapping", "symmetric_reweight",
    "EvalResult", "SynthSpec", "RunReport", "evaluate", "generate_synthetic",
    "multi_run",
    "PipelineConfig", "PipelineResult", "run_pipeline",
    "__version__",
]
