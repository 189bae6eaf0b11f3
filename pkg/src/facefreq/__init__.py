"""facefreq: face-manipulation detection from handcrafted frequency features.

The package follows the scikit-learn estimator conventions where the
algorithm is naturally fit/transform/predict shaped:

  * FacePreprocessor  - crop/pad/resize transformer over image lists
  * FeatureExtractor  - images to pooled feature vectors (DCT / SRM / DFT /
                        ELA / SVD / RGB)
  * LinearScorer      - AdaGrad-trained logistic scorer, predict_proba etc.

Evaluation (APCER/BPCER/DET/D-EER), calibration and score fusion are plain
functions over ScoreSet values, mirroring sklearn.metrics style.
"""

from .detector import FeatureExtractor, LinearScorer, TrainConfig, bce_loss_and_grad, vectorize
from .errors import FaceFreqError
from .features import (
    FeatureKind,
    SRM_KERNEL,
    dct2d,
    extract,
    extract_dct,
    extract_dft,
    extract_ela,
    extract_srm,
    extract_svd,
    idct2d,
)
from .fusion import (
    CalibratedScorer,
    CalibrationProtocol,
    FusionRule,
    apply_calibration,
    calibrate,
    fuse,
)
from .image_io import (
    FaceBox,
    crop_with_padding,
    decode_image,
    encode_jpeg,
    resize_bilinear,
    to_grayscale,
)
from .labels import ATTACK, BONAFIDE, label_name, parse_label
from .manifest import DatasetManifest, ManifestEntry, load_manifest, parse_manifest, write_manifest
from .metrics import (
    DetCurve,
    ScoreSet,
    d_eer,
    det_curve,
    rates_at,
    read_scores_csv,
    threshold_for_bpcer,
    write_scores_csv,
)
from .pipeline import RunConfig, load_run_config, run_pipeline
from .preprocess import (
    AugmentConfig,
    FacePreprocessor,
    PreprocessConfig,
    augment,
    preprocess_face,
    synthesize_face_box,
)
from .synth import generate_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "ATTACK",
    "AugmentConfig",
    "BONAFIDE",
    "CalibratedScorer",
    "CalibrationProtocol",
    "DatasetManifest",
    "DetCurve",
    "FaceBox",
    "FaceFreqError",
    "FacePreprocessor",
    "FeatureExtractor",
    "FeatureKind",
    "FusionRule",
    "LinearScorer",
    "ManifestEntry",
    "PreprocessConfig",
    "RunConfig",
    "SRM_KERNEL",
    "ScoreSet",
    "TrainConfig",
    "apply_calibration",
    "augment",
    "bce_loss_and_grad",
    "calibrate",
    "crop_with_padding",
    "d_eer",
    "dct2d",
    "decode_image",
    "det_curve",
    "encode_jpeg",
    "extract",
    "extract_dct",
    "extract_dft",
    "extract_ela",
    "extract_srm",
    "extract_svd",
    "fuse",
    "generate_synthetic_corpus",
    "idct2d",
    "label_name",
    "load_manifest",
    "load_run_config",
    "parse_label",
    "parse_manifest",
    "preprocess_face",
    "rates_at",
    "read_scores_csv",
    "resize_bilinear",
    "run_pipeline",
    "synthesize_face_box",
    "threshold_for_bpcer",
    "to_grayscale",
    "vectorize",
    "write_manifest",
    "write_scores_csv",
]
