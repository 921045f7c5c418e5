"""Exception types raised across the toolkit."""


class ParsegaitError(Exception):
    """Base class for all toolkit errors."""


class KeypointParseError(ParsegaitError):
    """Keypoint file is malformed; message names the offending line/record."""


class KeypointSchemaError(KeypointParseError):
    """Keypoint record does not carry exactly 17 joints."""


class AlignmentError(ParsegaitError):
    """Degenerate alignment box (zero width or height)."""


class FusionError(ParsegaitError):
    """Fusion inputs disagree (dimensions, label domain)."""


class AnalysisError(ParsegaitError):
    """Entropy analysis over an empty or incomplete input set."""


class FeatureError(ParsegaitError):
    """Frame feature extraction over inconsistent inputs."""


class PoolingError(ParsegaitError):
    """Pooling request incompatible with tensor shape."""


class EmbedError(ParsegaitError):
    """Embedding head shape mismatch or invalid statistics."""


class LossError(ParsegaitError):
    """Loss evaluated on invalid inputs (non-normalized predictions, ...)."""


class NonDifferentiableError(LossError):
    """Gradient requested exactly at a hinge kink."""


class EvaluationError(ParsegaitError):
    """Gallery/probe sets violate the evaluation protocol."""


class ContainerError(ParsegaitError):
    """Tensor container is corrupt; message carries the byte offset."""


class ConfigError(ParsegaitError):
    """Unknown or malformed pipeline configuration."""


class ManifestError(ParsegaitError):
    """Dataset manifest missing, malformed, or referencing absent paths."""


class ReportError(ParsegaitError):
    """Report generation over missing or mismatched run outputs."""
