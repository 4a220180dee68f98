"""Command-line front end: map, eval, synth and profile subcommands.

Exit codes: 0 success, 1 pipeline or I/O failure, 2 usage error. Heavy
imports are deferred until after the thread environment is applied, so
XLMAP_NUM_THREADS can still steer the BLAS thread pool.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time


def _apply_thread_env() -> None:
    # Must run before numpy is imported anywhere in the process.
    n = os.environ.get("XLMAP_NUM_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    from .initsol import InitConfig
    from .selflearn import SelfLearnConfig

    sl = SelfLearnConfig()
    ic = InitConfig()
    g = parser.add_argument_group("self-learning")
    g.add_argument("--keep-prob", type=float, default=sl.keep_prob_initial,
                   help="initial keep probability of stochastic induction")
    g.add_argument("--keep-prob-growth", type=float, default=sl.keep_prob_growth,
                   help="growth factor applied on each stall")
    g.add_argument("--stall-tolerance", type=float, default=sl.stall_tolerance,
                   help="minimum objective improvement that counts as progress")
    g.add_argument("--stall-patience", type=int, default=sl.stall_patience,
                   help="iterations without improvement before annealing")
    g.add_argument("--cutoff", type=int, default=sl.vocab_cutoff,
                   help="vocabulary cutoff for dictionary induction")
    g.add_argument("--csls-k", type=int, default=sl.csls_k,
                   help="neighborhood size of the CSLS correction")
    g.add_argument("--init-cutoff", type=int, default=ic.vocab_cutoff_init,
                   help="vocabulary cutoff of the unsupervised initializer")
    g.add_argument("--max-iterations", type=int, default=sl.max_iterations,
                   help="hard iteration cap of the self-learning loop")
    g.add_argument("--seed", type=int, default=0, help="random seed")
    a = parser.add_argument_group("ablations")
    a.add_argument("--no-stochastic", action="store_true",
                   help="disable stochastic dictionary induction")
    a.add_argument("--no-csls", action="store_true",
                   help="use plain nearest-neighbor retrieval")
    a.add_argument("--no-bidirectional", action="store_true",
                   help="induce the dictionary in one direction only")
    a.add_argument("--no-reweight", action="store_true",
                   help="skip the final symmetric re-weighting")
    a.add_argument("--no-unsup-init", action="store_true",
                   help="replace the unsupervised initializer with --seed-dict")
    a.add_argument("--seed-dict", metavar="PATH",
                   help="seed dictionary file (required with --no-unsup-init)")


def _pipeline_config(args: argparse.Namespace):
    from .initsol import InitConfig
    from .pipeline import PipelineConfig
    from .selflearn import SelfLearnConfig

    retrieval = "nn" if args.no_csls else "csls"
    return PipelineConfig(
        init=InitConfig(
            vocab_cutoff_init=args.init_cutoff,
            use_csls=not args.no_csls,
            bidirectional=not args.no_bidirectional,
            csls_k=args.csls_k),
        selflearn=SelfLearnConfig(
            keep_prob_initial=args.keep_prob,
            keep_prob_growth=args.keep_prob_growth,
            stall_tolerance=args.stall_tolerance,
            stall_patience=args.stall_patience,
            vocab_cutoff=args.cutoff,
            csls_k=args.csls_k,
            bidirectional=not args.no_bidirectional,
            stochastic=not args.no_stochastic,
            retrieval=retrieval,
            max_iterations=args.max_iterations,
            seed=args.seed),
        reweight=not args.no_reweight,
        use_unsup_init=not args.no_unsup_init)


def _config_dict(args: argparse.Namespace) -> dict:
    keys = ("keep_prob", "keep_prob_growth", "stall_tolerance", "stall_patience",
            "cutoff", "csls_k", "init_cutoff", "max_iterations", "seed",
            "no_stochastic", "no_csls", "no_bidirectional", "no_reweight",
            "no_unsup_init", "seed_dict")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _load_seed_dictionary(path: str, x_norm, z_norm, cutoff: int):
    import warnings

    from .embedio import load_dictionary
    from .selflearn import Dictionary

    pairs = load_dictionary(path)
    src_index, tgt_index = x_norm.word_index, z_norm.word_index
    kept, skipped = [], 0
    for s, t in pairs:
        i, j = src_index.get(s), tgt_index.get(t)
        if i is None or j is None or i >= cutoff or j >= cutoff:
            skipped += 1
            continue
        kept.append((i, j))
    if skipped:
        warnings.warn(f"{skipped} seed pair(s) outside the cutoff vocabulary")
    if not kept:
        raise ValueError("no usable pair in the seed dictionary")
    return Dictionary.from_pairs(kept)


def _cmd_map(args: argparse.Namespace) -> int:
    from . import vecmath
    from .embedio import Embedding, load_embeddings, save_embeddings
    from .pipeline import run_pipeline

    cfg = _pipeline_config(args)
    t0 = time.perf_counter()
    x = load_embeddings(args.src_input, max_vocab=args.max_vocab)
    z = load_embeddings(args.trg_input, max_vocab=args.max_vocab)
    load_time = time.perf_counter() - t0

    seed_dict = None
    if args.no_unsup_init:
        x_norm = Embedding(words=x.words, vectors=vecmath.normalize(x.vectors))
        z_norm = Embedding(words=z.words, vectors=vecmath.normalize(z.vectors))
        seed_dict = _load_seed_dictionary(
            args.seed_dict, x_norm, z_norm, args.cutoff)

    result = run_pipeline(x, z, cfg, seed_dictionary=seed_dict)
    mapping = result.final_mapping

    t0 = time.perf_counter()
    save_embeddings(Embedding(words=x.words,
                              vectors=result.x_norm.vectors @ mapping.wx),
                    args.src_output)
    save_embeddings(Embedding(words=z.words,
                              vectors=result.z_norm.vectors @ mapping.wz),
                    args.trg_output)
    save_time = time.perf_counter() - t0

    state = result.loop_state
    record = {
        "command": "map",
        "seed": args.seed,
        "config": _config_dict(args),
        "inputs": {"source": args.src_input, "target": args.trg_input},
        "outputs": {"source": args.src_output, "target": args.trg_output},
        "iterations": state.iterations,
        "converged": state.converged,
        "hit_max_iterations": state.hit_max_iterations,
        "keep_prob_final": state.keep_prob,
        "best_objective": state.best_objective,
        "objective_trace": state.objective_trace,
        "init_dictionary_size": len(result.init_dictionary),
        "dictionary_size": len(result.dictionary),
        "timings": dict(result.timings, load=load_time, save=save_time),
    }
    text = json.dumps(record, sort_keys=True)
    record_path = args.run_record or f"{args.src_output}.run.json"
    with open(record_path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    print(f"converged={state.converged} iterations={state.iterations} "
          f"objective={state.best_objective:.6f} "
          f"time={result.timings['total']:.1f}s record={record_path}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .embedio import load_dictionary, load_embeddings
    from .evalharness import (SUCCESS_THRESHOLD, evaluate, format_report,
                              report_json_lines, RunRecord, RunReport)
    from .selflearn import MappingPair

    if len(args.src_input) != len(args.trg_input):
        raise UsageError("each --src-input needs a matching --trg-input")
    gold = load_dictionary(args.dictionary)
    records = []
    for i, (src, trg) in enumerate(zip(args.src_input, args.trg_input)):
        x = load_embeddings(src)
        z = load_embeddings(trg)
        if x.dim != z.dim:
            raise ValueError(f"dimension mismatch: {x.dim} vs {z.dim}")
        t0 = time.perf_counter()
        res = evaluate(x, z, MappingPair.identity(x.dim), gold,
                       retrieval=args.retrieval, csls_k=args.csls_k)
        elapsed = time.perf_counter() - t0
        print(f"{src}: accuracy {100 * res.accuracy:.2f}% "
              f"(covered {res.covered}, oov {res.oov})")
        records.append(RunRecord(
            seed=i, accuracy=res.accuracy,
            success=res.accuracy > SUCCESS_THRESHOLD,
            runtime_seconds=elapsed, iterations=0, converged=True))
    report = RunReport(runs=records)
    if len(records) > 1:
        print(format_report(report))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("\n".join(report_json_lines(report)) + "\n")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    from .embedio import save_embeddings
    from .evalharness import (SynthSpec, format_report, generate_synthetic,
                              multi_run, report_json_lines)

    spec = SynthSpec(n_words=args.n_words, dim=args.dim,
                     noise_sigma=args.sigma, permute=not args.no_permute,
                     seed=args.data_seed)
    x, z, gold = generate_synthetic(spec)
    if args.save_src:
        save_embeddings(x, args.save_src)
    if args.save_trg:
        save_embeddings(z, args.save_trg)
    if args.save_gold:
        with open(args.save_gold, "w", encoding="utf-8") as fh:
            fh.writelines(f"{s}\t{t}\n" for s, t in gold)

    cfg = _pipeline_config(args)
    retrieval = "nn" if args.no_csls else "csls"
    report = multi_run(x, z, gold, cfg, n_runs=args.runs,
                       base_seed=args.seed, retrieval=retrieval)
    print(format_report(report))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("\n".join(report_json_lines(report)) + "\n")
    return 0


def _cmd_profile(args: argparse.Namespace) -> int:
    from .embedio import load_embeddings
    from .evalharness import export_profile, write_profile_csv

    emb = load_embeddings(args.input)
    cutoff = min(args.cutoff, len(emb))
    rows = export_profile(emb, args.word, cutoff)
    if args.output:
        write_profile_csv(rows, args.output)
    else:
        write_profile_csv(rows, sys.stdout)
    return 0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlmap",
        description="Learn and evaluate cross-lingual word embedding mappings "
                    "without bilingual supervision.")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON file with default values for any flag")
    parser.add_argument("--verbose", action="store_true",
                        help="log self-learning progress")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_map = sub.add_parser("map", help="learn a mapping and write mapped embeddings")
    p_map.add_argument("--src-input", required=True, help="source embedding file")
    p_map.add_argument("--trg-input", required=True, help="target embedding file")
    p_map.add_argument("--src-output", required=True, help="mapped source output")
    p_map.add_argument("--trg-output", required=True, help="mapped target output")
    p_map.add_argument("--run-record", metavar="PATH",
                       help="JSON run record path (default: <src-output>.run.json)")
    p_map.add_argument("--max-vocab", type=int, default=None,
                       help="load at most this many words per language")
    _add_pipeline_flags(p_map)
    p_map.set_defaults(func=_cmd_map)

    p_eval = sub.add_parser("eval", help="score mapped embeddings against a gold dictionary")
    p_eval.add_argument("--src-input", action="append", required=True,
                        help="mapped source embeddings (repeat for multiple runs)")
    p_eval.add_argument("--trg-input", action="append", required=True,
                        help="mapped target embeddings (repeat for multiple runs)")
    p_eval.add_argument("--dictionary", required=True, help="gold dictionary file")
    p_eval.add_argument("--retrieval", choices=("csls", "nn"), default="csls")
    p_eval.add_argument("--csls-k", type=int, default=10)
    p_eval.add_argument("--report", metavar="PATH", help="write JSON lines here")
    p_eval.set_defaults(func=_cmd_eval)

    p_synth = sub.add_parser("synth", help="run the pipeline on a planted-isometry benchmark")
    p_synth.add_argument("--n-words", type=int, default=2000)
    p_synth.add_argument("--dim", type=int, default=50)
    p_synth.add_argument("--sigma", type=float, default=0.0,
                         help="per-component Gaussian noise on the target side")
    p_synth.add_argument("--no-permute", action="store_true",
                         help="keep the planted dictionary at the identity")
    p_synth.add_argument("--data-seed", type=int, default=0,
                         help="seed of the generated corpus (pipeline runs use --seed)")
    p_synth.add_argument("--runs", type=int, default=1,
                         help="pipeline repetitions with seeds seed..seed+runs-1")
    p_synth.add_argument("--report", metavar="PATH", help="write JSON lines here")
    p_synth.add_argument("--save-src", metavar="PATH", help="save the source embeddings")
    p_synth.add_argument("--save-trg", metavar="PATH", help="save the target embeddings")
    p_synth.add_argument("--save-gold", metavar="PATH", help="save the planted dictionary")
    _add_pipeline_flags(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_prof = sub.add_parser("profile", help="export similarity-value profiles as CSV")
    p_prof.add_argument("--input", required=True, help="embedding file")
    p_prof.add_argument("--word", action="append", required=True,
                        help="word to profile (repeatable)")
    p_prof.add_argument("--cutoff", type=int, default=4000)
    p_prof.add_argument("--output", metavar="PATH", help="CSV output (default stdout)")
    p_prof.set_defaults(func=_cmd_profile)
    parser._subcommands = {"map": p_map, "eval": p_eval,
                           "synth": p_synth, "profile": p_prof}
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        sub = parser._subcommands[args.subcommand]
        known = {a.dest for a in parser._actions} | {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            parser.error(f"unknown config key(s): {', '.join(sorted(unknown))}")
        sub.set_defaults(**overrides)
        parser.set_defaults(**{k: v for k, v in overrides.items()
                               if k in {a.dest for a in parser._actions}})
        args = parser.parse_args(argv)  # explicit flags still win

    if getattr(args, "no_unsup_init", False) and not getattr(args, "seed_dict", None):
        parser.error("--no-unsup-init requires --seed-dict")

    if args.verbose:
        import logging
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(message)s"))
        pkg_logger = logging.getLogger("xlmap")
        pkg_logger.addHandler(handler)
        pkg_logger.setLevel(logging.DEBUG)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
