"""Batch command-line interface.

Verbs: synth, extract, train, score, eval, fuse, run. Exit codes:
0 = ok, 1 = usage error, 2 = data error (bad manifest/scores/images),
3 = internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .cache import FeatureCache
from .detector import LinearScorer, TrainConfig
from .errors import FaceFreqError
from .features import kind_from_params
from .fusion import CalibrationProtocol, FusionRule, calibrate, fuse
from .manifest import load_manifest
from .metrics import (
    ScoreSet,
    d_eer,
    det_curve,
    rates_at,
    read_scores_csv,
    write_det_csv,
    write_scores_csv,
)
from .pipeline import (
    RunConfig,
    compute_feature_vector,
    extractor_for,
    load_run_config,
    run_pipeline,
)
from .report import write_det_svg
from .synth import generate_synthetic_corpus

USAGE_EXIT, DATA_EXIT, INTERNAL_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--cache-dir", type=Path, default=None, help="feature cache directory")
    parser.add_argument("--out-dir", type=Path, default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=None, help="parallel extraction workers")


def _kind_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", default="dct", help="rgb|dct|srm|dft|ela|svd")
    parser.add_argument("--dct-block", default=None, help="tile size or 'whole'")
    parser.add_argument("--ela-quality", type=int, default=None)
    parser.add_argument("--svd-rank", type=int, default=None)
    parser.add_argument("--svd-residual", action="store_true")
    parser.add_argument("--vector-side", type=int, default=None)


def _kind_from_args(args):
    params = {}
    if args.dct_block is not None:
        params["dct_block"] = args.dct_block if args.dct_block == "whole" else int(args.dct_block)
    if args.ela_quality is not None:
        params["ela_quality"] = args.ela_quality
    if args.svd_rank is not None:
        params["svd_rank"] = args.svd_rank
    if args.svd_residual:
        params["svd_residual"] = True
    return kind_from_params(args.kind, **params)


def _run_config(args, kinds=None, train=None) -> RunConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.cache_dir is not None:
        overrides["cache_dir"] = args.cache_dir
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if getattr(args, "vector_side", None) is not None:
        overrides["vector_side"] = args.vector_side
    if kinds is not None:
        overrides["kinds"] = kinds
    if train is not None:
        overrides["train"] = train
    return load_run_config(args.config, **overrides)


def _extract_all(manifest, cfg: RunConfig, kind) -> tuple[np.ndarray, FeatureCache]:
    cache = FeatureCache(cfg.cache_dir)
    extractor = extractor_for(kind, cfg.vector_side)
    vecs = [
        compute_feature_vector(entry, i, extractor, cfg, cache)
        for i, entry in enumerate(manifest.entries)
    ]
    return np.stack(vecs) if vecs else np.empty((0, cfg.vector_side**2)), cache


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else 0
    out_dir = args.out_dir if args.out_dir is not None else Path("synthetic_corpus")
    manifest, _ = generate_synthetic_corpus(args.bonafide, args.attack, seed, out_dir)
    print(f"wrote {len(manifest)} samples to {out_dir} (manifest.jsonl included)")
    return 0


def cmd_extract(args) -> int:
    manifest = load_manifest(args.manifest)
    cfg = _run_config(args)
    kind = _kind_from_args(args)
    matrix, cache = _extract_all(manifest, cfg, kind)
    print(
        f"extracted {matrix.shape[0]} x {matrix.shape[1]} [{kind.tag}] "
        f"(cache hits {cache.hits}, misses {cache.misses})"
    )
    return 0


def cmd_train(args) -> int:
    manifest = load_manifest(args.manifest)
    train = None
    if args.learning_rate or args.batch_size or args.max_steps:
        base = load_run_config(args.config).train
        train = TrainConfig(
            learning_rate=args.learning_rate or base.learning_rate,
            batch_size=args.batch_size or base.batch_size,
            max_steps=args.max_steps or base.max_steps,
            seed=args.seed if args.seed is not None else base.seed,
        )
    cfg = _run_config(args, train=train)
    kind = _kind_from_args(args)
    matrix, _ = _extract_all(manifest, cfg, kind)
    rows = [i for i, e in enumerate(manifest.entries) if e.split == "train"]
    y = np.array([manifest.entries[i].label for i in rows], dtype=np.int8)
    scorer = LinearScorer.from_config(cfg.train, kind.tag)
    scorer.fit(matrix[rows], y)
    scorer.save(args.out)
    print(f"trained [{kind.tag}] on {len(rows)} samples -> {args.out}")
    return 0


def cmd_score(args) -> int:
    manifest = load_manifest(args.manifest)
    scorer = LinearScorer.load(args.model)
    cfg = _run_config(args)
    args_with_kind = argparse.Namespace(**{**vars(args), "kind": scorer.kind})
    kind = _kind_from_args(args_with_kind)
    rows = [(i, e) for i, e in enumerate(manifest.entries) if e.split == args.split]
    if not rows:
        raise FaceFreqError(f"no samples in split {args.split!r}")
    cache = FeatureCache(cfg.cache_dir)
    extractor = extractor_for(kind, cfg.vector_side)
    matrix = np.stack(
        [compute_feature_vector(e, i, extractor, cfg, cache) for i, e in rows]
    )
    ids = tuple(manifest.sample_id(e) for _, e in rows)
    labels = np.array([e.label for _, e in rows], dtype=np.int8)
    scores = ScoreSet(ids, labels, scorer.score_samples(matrix))
    write_scores_csv(scores, args.out)
    print(f"scored {len(scores)} samples [{scorer.kind}/{args.split}] -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    scores = read_scores_csv(args.scores)
    eer, threshold = d_eer(scores)
    apcer, bpcer = rates_at(scores, 0.5)
    print(f"d_eer      {eer:.6f} (threshold {threshold:.6f})")
    print(f"apcer@0.5  {apcer:.6f}")
    print(f"bpcer@0.5  {bpcer:.6f}")
    if args.bpcer_target is not None:
        cal = calibrate(scores, CalibrationProtocol("target_bpcer", args.bpcer_target))
        print(f"threshold for BPCER<={args.bpcer_target}: {cal.threshold:.6g}")
    curve = det_curve(scores)
    if args.det_csv:
        write_det_csv(curve, args.det_csv)
        print(f"DET csv -> {args.det_csv}")
    if args.det_svg:
        write_det_svg(curve, f"DET: {Path(args.scores).stem}", args.det_svg)
        print(f"DET svg -> {args.det_svg}")
    return 0


def cmd_fuse(args) -> int:
    sets = [read_scores_csv(p) for p in args.scores]
    weights = None
    if args.weights:
        weights = tuple(float(w) for w in args.weights.split(","))
    rule = FusionRule(args.rule, weights)
    fused = fuse(sets, rule)
    write_scores_csv(fused, args.out)
    print(f"fused {len(sets)} score sets [{args.rule}] -> {args.out}")
    return 0


def cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    kinds = None
    if args.kinds:
        kinds = tuple(kind_from_params(tag.strip()) for tag in args.kinds.split(","))
    cfg = _run_config(args, kinds=kinds)
    report = run_pipeline(manifest, cfg)
    print(f"run complete -> {report.out_dir}")
    print(f"cache: {report.cache_hits} hits, {report.cache_misses} misses")
    print(report.metrics_md.read_text())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="facefreq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic tamper corpus")
    _global_flags(p)
    p.add_argument("--bonafide", type=int, required=True)
    p.add_argument("--attack", type=int, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="warm the feature cache for a manifest")
    _global_flags(p)
    _kind_flags(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a linear scorer on the train split")
    _global_flags(p)
    _kind_flags(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="model file to write")
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score one split with a trained model")
    _global_flags(p)
    _kind_flags(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="evaluate a score CSV (D-EER, DET exports)")
    _global_flags(p)
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--det-csv", type=Path, default=None)
    p.add_argument("--det-svg", type=Path, default=None)
    p.add_argument("--bpcer-target", type=float, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fuse", help="fuse two or more score CSVs")
    _global_flags(p)
    p.add_argument("--scores", type=Path, nargs="+", required=True)
    p.add_argument("--rule", default="min", choices=("min", "mean", "max", "weighted"))
    p.add_argument("--weights", default=None, help="comma-separated, weighted rule only")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("run", help="full pipeline: extract/train/score/calibrate/fuse/report")
    _global_flags(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--kinds", default=None, help="comma-separated feature tags")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FaceFreqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
