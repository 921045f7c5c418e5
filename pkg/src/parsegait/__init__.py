"""Part-labeled skeleton rendering, silhouette fusion, and gait retrieval tools."""

from .config import PipelineConfig, apply_overrides, config_hash, load_config_file
from .dataset import Manifest, SequenceRecord, load_manifest, save_manifest
from .entropy import (
    MAX_ENTROPY_BITS,
    ClassHistogram,
    class_histogram,
    class_shares,
    entropy_bits,
    merge_histograms,
)
from .errors import (
    AlignmentError,
    AnalysisError,
    ConfigError,
    ContainerError,
    EmbedError,
    EvaluationError,
    FeatureError,
    FusionError,
    KeypointParseError,
    KeypointSchemaError,
    LossError,
    ManifestError,
    NonDifferentiableError,
    ParsegaitError,
    PoolingError,
    ReportError,
)
from .fuse import (
    STRATEGIES,
    TARGET_SIZE,
    FusedSample,
    SilhouetteMask,
    collapse_dcf,
    fuse_crf,
    fuse_dcf,
    fuse_frame,
    load_silhouette,
    resize_labels,
    save_silhouette,
    silhouette_to_labels,
)
from .pose import (
    FILE_HEADER,
    JOINT_COUNT,
    JOINT_NAMES,
    Box,
    Keypoint,
    KeypointFrame,
    KeypointSequence,
    ValidityConfig,
    align_keypoints,
    filter_valid,
    joint_bounding_box,
    load_keypoint_sequence,
    mask_bounding_box,
    save_keypoint_sequence,
)
from .recognition import (
    EmbeddingHead,
    EvalReport,
    EvalSet,
    TripletBatch,
    cross_entropy,
    cross_entropy_from_logits,
    cross_entropy_gradient,
    embed,
    evaluate,
    extract_frame_features,
    horizontal_pool,
    identity_head,
    softmax,
    standardizing_head,
    temporal_pool,
    triplet_gradient,
    triplet_loss,
)
from .render import (
    CLASS_COUNT,
    CLASS_NAMES,
    DEFAULT_PALETTE,
    BodyPart,
    LabelRaster,
    PartMapping,
    RenderConfig,
    colorize,
    default_part_mapping,
    load_label_raster,
    rasterize_circle,
    rasterize_segment,
    render_parsing_skeleton,
    save_label_raster,
)
from .synth import (
    CONDITIONS,
    SynthClip,
    WalkerParams,
    derive_walker,
    generate_clip,
    generate_clips,
    generate_dataset,
    joints_at,
)
from .tensorio import read_tensor, write_tensor

__version__ = "0.1.0"
