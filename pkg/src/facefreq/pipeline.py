"""End-to-end orchestration: manifest in, score CSVs / metrics tables /
DET plots out.

Per feature kind: extract pooled vectors (through the content-addressed
cache), train a linear scorer on the train split, score val and test,
calibrate on val, then fuse the calibrated per-kind scores. Runs are
deterministic for a fixed (manifest, config, seed) and identical with the
cache on or off.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cache import FeatureCache, feature_key
from .detector import FeatureExtractor, LinearScorer, TrainConfig
from .errors import FaceFreqError, PipelineError
from .features import FeatureKind, kind_from_params
from .fusion import CalibrationProtocol, FusionRule, apply_calibration, calibrate, fuse
from .image_io import decode_image
from .manifest import DatasetManifest, ManifestEntry
from .metrics import ScoreSet, d_eer, det_curve, write_det_csv, write_scores_csv
from .preprocess import AugmentConfig, PreprocessConfig, augment, preprocess_face
from .report import write_det_svg, write_metrics_csv, write_metrics_markdown


@dataclass(frozen=True)
class RunConfig:
    kinds: tuple[FeatureKind, ...] = (FeatureKind("dct"), FeatureKind("ela"), FeatureKind("srm"))
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    augment: AugmentConfig | None = None
    fusion: FusionRule = field(default_factory=lambda: FusionRule("min"))
    calibration: CalibrationProtocol = field(
        default_factory=lambda: CalibrationProtocol("target_bpcer", 0.02)
    )
    vector_side: int = 32
    cache_dir: Path | None = None
    out_dir: Path = Path("runs/latest")
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if not self.kinds:
            raise ValueError("at least one feature kind is required")
        if self.vector_side < 1:
            raise ValueError("vector_side must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def load_run_config(
    toml_path: str | Path | None = None, **overrides
) -> RunConfig:
    """Build a RunConfig from a TOML file plus keyword overrides
    (seed/cache_dir/out_dir/jobs/kinds...). CLI flags map onto overrides."""
    data: dict = {}
    if toml_path is not None:
        with open(toml_path, "rb") as fh:
            data = tomllib.load(fh)

    seed = int(overrides.get("seed", data.get("seed", 0)))

    kinds: tuple[FeatureKind, ...] | None = None
    if "kinds" in overrides and overrides["kinds"]:
        kinds = tuple(overrides["kinds"])
    elif data.get("features"):
        built = []
        for spec in data["features"]:
            params = dict(spec)
            tag = params.pop("kind")
            built.append(kind_from_params(tag, **params))
        kinds = tuple(built)

    pre = PreprocessConfig(**data.get("preprocess", {}))

    train_data = dict(data.get("train", {}))
    train_data.setdefault("seed", seed)
    train = TrainConfig(**train_data)

    aug = None
    aug_data = dict(data.get("augment", {}))
    if aug_data.pop("enabled", False):
        aug_data.setdefault("seed", seed)
        for name in ("contrast_range", "saturation_range", "jpeg_quality_range"):
            if name in aug_data and aug_data[name] is not None:
                aug_data[name] = tuple(aug_data[name])
        aug = AugmentConfig(**aug_data)

    fusion_data = data.get("fusion", {})
    rule = FusionRule(
        fusion_data.get("rule", "min"),
        tuple(fusion_data["weights"]) if "weights" in fusion_data else None,
    )

    cal_data = data.get("calibration", {})
    protocol = CalibrationProtocol(
        cal_data.get("protocol", "target_bpcer"),
        cal_data.get("target", 0.02 if cal_data.get("protocol", "target_bpcer") == "target_bpcer" else None),
    )

    cfg = RunConfig(
        kinds=kinds if kinds is not None else RunConfig.kinds,
        preprocess=pre,
        train=train,
        augment=aug,
        fusion=rule,
        calibration=protocol,
        vector_side=int(data.get("vector_side", 32)),
        cache_dir=Path(data["cache_dir"]) if "cache_dir" in data else None,
        out_dir=Path(data.get("out_dir", "runs/latest")),
        seed=seed,
        jobs=int(data.get("jobs", 1)),
    )
    for name in ("cache_dir", "out_dir", "jobs", "vector_side"):
        if name in overrides and overrides[name] is not None:
            value = overrides[name]
            if name in ("cache_dir", "out_dir"):
                value = Path(value)
            cfg = replace(cfg, **{name: value})
    if "train" in overrides and overrides["train"] is not None:
        cfg = replace(cfg, train=overrides["train"])
    return cfg


@dataclass
class RunReport:
    out_dir: Path
    score_files: dict[tuple[str, str], Path]
    metrics_rows: list[dict]
    metrics_csv: Path
    metrics_md: Path
    cache_hits: int
    cache_misses: int


def compute_feature_vector(
    entry: ManifestEntry,
    sample_index: int,
    extractor: FeatureExtractor,
    cfg: RunConfig,
    cache: FeatureCache,
) -> np.ndarray:
    """Decode, preprocess (plus train-split augmentation when configured)
    and extract one pooled vector, going through the cache."""
    try:
        raw = entry.path.read_bytes()
        extra = ""
        augmenting = cfg.augment is not None and entry.split == "train"
        if augmenting:
            extra = f"aug:seed={cfg.augment.seed}:idx={sample_index}"
        key = feature_key(raw, extractor.recipe_token(), cfg.preprocess, extra)
        cached = cache.get(key)
        if cached is not None:
            return cached
        face = preprocess_face(decode_image(raw), entry.face_box, cfg.preprocess)
        if augmenting:
            face = augment(face, entry.label, cfg.augment, sample_index)
        vec = extractor.transform_one(face)
        cache.put(key, vec)
        return vec
    except FaceFreqError as exc:
        raise PipelineError(f"{entry.path} [{extractor.kind}]: {exc}") from exc
    except OSError as exc:
        raise PipelineError(f"{entry.path} [{extractor.kind}]: {exc}") from exc


def _extract_matrix(
    entries: list[tuple[int, ManifestEntry]],
    extractor: FeatureExtractor,
    cfg: RunConfig,
    cache: FeatureCache,
) -> np.ndarray:
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            vecs = list(
                pool.map(
                    lambda pair: compute_feature_vector(pair[1], pair[0], extractor, cfg, cache),
                    entries,
                )
            )
    else:
        vecs = [compute_feature_vector(e, i, extractor, cfg, cache) for i, e in entries]
    return np.stack(vecs)


def extractor_for(kind: FeatureKind, vector_side: int) -> FeatureExtractor:
    return FeatureExtractor(
        kind=kind.tag,
        dct_block=kind.dct_block,
        ela_quality=kind.ela_quality,
        svd_rank=kind.svd_rank,
        svd_residual=kind.svd_residual,
        vector_side=vector_side,
    )


def _metric_rows_for(
    model: str, protocol: str, split: str, scores: ScoreSet, id_to_source: dict[str, str]
) -> list[dict]:
    rows = []
    groups: dict[str, list[int]] = {"all": list(range(len(scores)))}
    for i, sid in enumerate(scores.ids):
        groups.setdefault(id_to_source[sid], []).append(i)
    for dataset, idx in groups.items():
        labels = scores.labels[idx]
        if len(np.unique(labels)) < 2:
            continue
        subset = ScoreSet(
            tuple(scores.ids[i] for i in idx), labels, scores.scores[idx]
        )
        eer, thr = d_eer(subset)
        rows.append(
            {
                "model": model,
                "protocol": protocol,
                "split": split,
                "dataset": dataset,
                "d_eer": eer,
                "threshold": thr,
            }
        )
    return rows


def run_pipeline(manifest: DatasetManifest, cfg: RunConfig) -> RunReport:
    """Execute the full train/score/calibrate/fuse/report pipeline."""
    for split in ("train", "val", "test"):
        if not manifest.split(split):
            raise PipelineError(f"manifest has no samples in required split {split!r}")

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(cfg.cache_dir)

    indexed = list(enumerate(manifest.entries))
    by_split = {
        split: [(i, e) for i, e in indexed if e.split == split]
        for split in ("train", "val", "test")
    }
    ids = {
        split: tuple(manifest.sample_id(e) for _, e in pairs)
        for split, pairs in by_split.items()
    }
    labels = {
        split: np.array([e.label for _, e in pairs], dtype=np.int8)
        for split, pairs in by_split.items()
    }
    id_to_source = {manifest.sample_id(e): e.source for e in manifest}
    protocol_name = cfg.calibration.name()

    score_files: dict[tuple[str, str], Path] = {}
    metrics_rows: list[dict] = []
    raw_scores: dict[tuple[str, str], ScoreSet] = {}
    calibrators = {}

    for kind in cfg.kinds:
        extractor = extractor_for(kind, cfg.vector_side)
        matrices = {
            split: _extract_matrix(by_split[split], extractor, cfg, cache)
            for split in ("train", "val", "test")
        }
        scorer = LinearScorer.from_config(cfg.train, kind.tag)
        scorer.fit(matrices["train"], labels["train"])
        scorer.save(out / "models" / f"{kind.tag}.bin")

        for split in ("val", "test"):
            scores = ScoreSet(ids[split], labels[split], scorer.score_samples(matrices[split]))
            raw_scores[(kind.tag, split)] = scores
            path = out / "scores" / f"{kind.tag}_{split}.csv"
            write_scores_csv(scores, path)
            score_files[(kind.tag, split)] = path
            metrics_rows.extend(
                _metric_rows_for(kind.tag, protocol_name, split, scores, id_to_source)
            )
        calibrators[kind.tag] = calibrate(raw_scores[(kind.tag, "val")], cfg.calibration)

    fusion_model = f"fusion_{cfg.fusion.kind}"
    if len(cfg.kinds) >= 2:
        for split in ("val", "test"):
            calibrated = [
                apply_calibration(calibrators[kind.tag], raw_scores[(kind.tag, split)])
                for kind in cfg.kinds
            ]
            fused = fuse(calibrated, cfg.fusion)
            path = out / "scores" / f"{fusion_model}_{split}.csv"
            write_scores_csv(fused, path)
            score_files[(fusion_model, split)] = path
            metrics_rows.extend(
                _metric_rows_for(fusion_model, protocol_name, split, fused, id_to_source)
            )
            raw_scores[(fusion_model, split)] = fused

    for (model, split), scores in raw_scores.items():
        curve = det_curve(scores)
        write_det_csv(curve, out / "det" / f"{model}_{split}.csv")
        write_det_svg(curve, f"DET: {model} ({split})", out / "det" / f"{model}_{split}.svg")

    metrics_csv = out / "metrics.csv"
    metrics_md = out / "metrics.md"
    write_metrics_csv(metrics_rows, metrics_csv)
    train_sources = tuple(sorted({e.source for e in manifest.split("train")}))
    write_metrics_markdown(metrics_rows, train_sources, metrics_md)

    return RunReport(
        out_dir=out,
        score_files=score_files,
        metrics_rows=metrics_rows,
        metrics_csv=metrics_csv,
        metrics_md=metrics_md,
        cache_hits=cache.hits,
        cache_misses=cache.misses,
    )
