import numpy as np
import pytest

from xlmap.evalharness import SynthSpec, generate_synthetic, random_dictionary
from xlmap.initsol import InitConfig
from xlmap.pipeline import PipelineConfig, run_pipeline
from xlmap.selflearn import SelfLearnConfig


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic(SynthSpec(n_words=100, dim=12, noise_sigma=0.01,
                                        permute=True, seed=1))


def _cfg(**kw):
    return PipelineConfig(init=InitConfig(vocab_cutoff_init=100, csls_k=5),
                          selflearn=SelfLearnConfig(csls_k=5, max_iterations=300),
                          **kw)


class TestRunPipeline:
    def test_produces_refined_mapping_by_default(self, corpus):
        x, z, _ = corpus
        res = run_pipeline(x, z, _cfg().with_seed(0))
        assert res.refined_mapping is not None
        assert res.final_mapping is res.refined_mapping
        assert set(res.timings) >= {"normalize", "init", "self_learn", "reweight", "total"}

    def test_no_reweight_keeps_orthogonal_mapping(self, corpus):
        x, z, _ = corpus
        res = run_pipeline(x, z, _cfg(reweight=False).with_seed(0))
        assert res.refined_mapping is None
        assert res.final_mapping is res.selflearn_mapping
        w = res.selflearn_mapping.wx
        np.testing.assert_allclose(w.T @ w, np.eye(w.shape[0]), atol=1e-4)

    def test_seed_dictionary_required_without_unsup_init(self, corpus):
        x, z, _ = corpus
        with pytest.raises(ValueError):
            run_pipeline(x, z, _cfg(use_unsup_init=False).with_seed(0))
        d0 = random_dictionary(100, 100, seed=0)
        res = run_pipeline(x, z, _cfg(use_unsup_init=False).with_seed(0),
                           seed_dictionary=d0)
        assert res.init_dictionary is d0

    def test_normalized_embeddings_exposed(self, corpus):
        x, z, _ = corpus
        res = run_pipeline(x, z, _cfg().with_seed(0))
        np.testing.assert_allclose(
            np.linalg.norm(res.x_norm.vectors.astype(np.float64), axis=1), 1.0,
            atol=1e-6)
        assert res.x_norm.words == x.words
