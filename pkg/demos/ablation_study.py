#!/usr/bin/env python3
"""Desk-scale ablation: which pieces of the pipeline actually matter?

Runs the full system and each single-component ablation on the same noisy
synthetic benchmark, several seeds each, and prints a results table. On this
benchmark the decisive component is the unsupervised initialization: with a
random seed dictionary, self-learning gets stuck near 0%. The remaining
ablations matter on real embedding data (where hubness and local optima
bite much harder than on clean Gaussian spaces) but stay benign here.

Takes a few minutes; shrink N_RUNS or n_words below to go faster.
"""
from dataclasses import replace

from xlmap.evalharness import (SynthSpec, generate_synthetic, multi_run,
                               random_dictionary)
from xlmap.pipeline import PipelineConfig

N_RUNS = 3
x, z, gold = generate_synthetic(
    SynthSpec(n_words=800, dim=40, noise_sigma=0.05, permute=True, seed=7))

full = PipelineConfig()
variants = {
    "full system": (full, None),
    "- stochastic": (replace(full, selflearn=replace(full.selflearn, stochastic=False)), None),
    "- CSLS": (replace(full,
                       init=replace(full.init, use_csls=False),
                       selflearn=replace(full.selflearn, retrieval="nn")), None),
    "- bidirectional": (replace(full,
                                init=replace(full.init, bidirectional=False),
                                selflearn=replace(full.selflearn, bidirectional=False)), None),
    "- re-weighting": (replace(full, reweight=False), None),
    "- unsup. init": (replace(full, use_unsup_init=False),
                      lambda seed: random_dictionary(800, 800, seed)),
}

print(f"{'variant':<18} {'best%':>7} {'avg%':>7} {'ok':>3} {'t(s)':>6}")
for name, (cfg, seed_dict) in variants.items():
    report = multi_run(x, z, gold, cfg, n_runs=N_RUNS, base_seed=0,
                       seed_dictionary=seed_dict)
    print(f"{name:<18} {100 * report.best:>7.2f} {100 * report.average:>7.2f} "
          f"{report.success_count:>2}/{report.n_runs} "
          f"{report.mean_runtime_seconds:>6.1f}")
