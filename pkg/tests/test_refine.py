import numpy as np
import pytest

from xlmap import vecmath
from xlmap.refine import symmetric_reweight
from xlmap.selflearn import Dictionary

from helpers import random_orthogonal


def _instance(seed, n=80, d=8):
    rng = np.random.default_rng(seed)
    x = vecmath.normalize(rng.standard_normal((n, d)).astype(np.float32))
    q = random_orthogonal(d, rng).astype(np.float32)
    z = vecmath.normalize((x @ q + 0.05 * rng.standard_normal((n, d))).astype(np.float32))
    dic = Dictionary(src=np.arange(n), tgt=np.arange(n))
    return x, z, dic


class TestSymmetricReweight:
    def test_already_whitened_identity_dictionary(self):
        rng = np.random.default_rng(0)
        q = random_orthogonal(10, rng)[:, :4]
        x = np.vstack([q, np.zeros((3, 4))]).astype(np.float32)
        dic = Dictionary(src=np.arange(10), tgt=np.arange(10))
        ref = symmetric_reweight(x, x.copy(), dic)
        np.testing.assert_allclose(x @ ref.wx, x @ ref.wz, atol=1e-4)

    def test_direction_symmetry(self):
        """Swapping source and target roles transposes the mapped similarities."""
        x, z, dic = _instance(1)
        fwd = symmetric_reweight(x, z, dic)
        rev = symmetric_reweight(z, x, Dictionary(src=dic.tgt, tgt=dic.src))
        sims_fwd = (x @ fwd.wx) @ (z @ fwd.wz).T
        sims_rev = (z @ rev.wx) @ (x @ rev.wz).T
        np.testing.assert_allclose(sims_fwd, sims_rev.T, atol=1e-4)

    def test_provenance_recomposes(self):
        x, z, dic = _instance(2)
        ref = symmetric_reweight(x, z, dic)
        wx, wz = ref.provenance.compose()
        np.testing.assert_allclose(wx.astype(np.float32), ref.wx, atol=1e-4)
        np.testing.assert_allclose(wz.astype(np.float32), ref.wz, atol=1e-4)

    def test_prewhitened_similarity_identity(self):
        """Before de-whitening, mapped similarities are exactly Xw U S Vt Zw^T."""
        x, z, dic = _instance(3)
        ref = symmetric_reweight(x, z, dic)
        f = ref.provenance
        x64, z64 = x.astype(np.float64), z.astype(np.float64)
        xw, zw = x64 @ f.whiten_x, z64 @ f.whiten_z
        lhs = (xw @ (f.u * np.sqrt(f.s))) @ (zw @ (f.vt.T * np.sqrt(f.s))).T
        rhs = xw @ f.u @ np.diag(f.s) @ f.vt @ zw.T
        rel = np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)
        assert rel <= 1e-3

    def test_unit_singular_values_give_whitened_procrustes(self):
        """With S forced to ones, the factor chain is the whitened orthogonal map."""
        x, z, dic = _instance(4)
        ref = symmetric_reweight(x, z, dic)
        f = ref.provenance
        x64, z64 = x.astype(np.float64), z.astype(np.float64)
        xw, zw = x64 @ f.whiten_x, z64 @ f.whiten_z
        ones = np.ones_like(f.s)
        lhs = (xw @ (f.u * ones)) @ (zw @ (f.vt.T * ones)).T
        rhs = (xw @ f.u) @ (zw @ f.vt.T).T
        np.testing.assert_allclose(lhs, rhs, atol=1e-4)

    def test_not_orthogonal_in_general(self):
        x, z, dic = _instance(5)
        ref = symmetric_reweight(x, z, dic)
        assert np.max(np.abs(ref.wx.T @ ref.wx - np.eye(ref.wx.shape[0]))) > 1e-3

    def test_index_bounds_checked(self):
        x, z, _ = _instance(6)
        with pytest.raises(ValueError):
            symmetric_reweight(x, z, Dictionary.from_pairs([(0, 999)]))

    def test_no_degradation_on_synthetic_benchmark(self):
        from xlmap.evalharness import SynthSpec, evaluate, generate_synthetic
        from xlmap.pipeline import PipelineConfig, run_pipeline

        x, z, gold = generate_synthetic(
            SynthSpec(n_words=400, dim=32, noise_sigma=0.02, permute=True, seed=11))
        res = run_pipeline(x, z, PipelineConfig().with_seed(0))
        after = evaluate(res.x_norm, res.z_norm, res.refined_mapping, gold).accuracy
        before = evaluate(res.x_norm, res.z_norm, res.selflearn_mapping, gold).accuracy
        assert after >= before - 0.005
