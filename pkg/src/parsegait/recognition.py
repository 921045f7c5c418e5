"""Desk-scale recognition lab: features, pooling, losses, retrieval metrics.

The deep backbone is replaced by a deterministic handcrafted extractor
(per-band class fractions), which keeps the pooling, loss, and evaluation
math fully exercised without any learning.  Tensors are float64 throughout;
all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmbedError,
    EvaluationError,
    FeatureError,
    LossError,
    NonDifferentiableError,
    PoolingError,
)
from .fuse import FusedSample
from .render import CLASS_COUNT

KINK_TOLERANCE = 1e-6


def extract_frame_features(frames: Sequence[FusedSample], bands: int = 16) -> np.ndarray:
    """Per-band class-fraction features; returns shape (1, 13, s, bands, 1).

    For a composite (CRF) frame, channel k of band b is the fraction of the
    band's pixels labeled k; for a channel stack (DCF) it is the band mean of
    channel k.  Stands in for a learned backbone.
    """
    if not frames:
        raise FeatureError("cannot extract features from an empty frame sequence")
    strategies = {f.strategy for f in frames}
    if len(strategies) != 1:
        raise FeatureError(f"mixed fusion strategies in one sequence: {sorted(strategies)}")
    strategy = strategies.pop()

    per_frame = []
    shape = None
    for frame in frames:
        grid = frame.crf.labels if strategy == "crf" else frame.dcf
        if shape is None:
            shape = grid.shape
            h, w = shape[-2], shape[-1]
            if h % bands != 0:
                raise FeatureError(f"height {h} is not divisible into {bands} bands")
            rows = h // bands
        elif grid.shape != shape:
            raise FeatureError(f"frame size {grid.shape} differs from {shape}")
        if strategy == "crf":
            banded = grid.reshape(bands, rows, w)
            feats = np.stack(
                [
                    np.bincount(banded[b].ravel(), minlength=CLASS_COUNT) / (rows * w)
                    for b in range(bands)
                ],
                axis=1,
            )  # (13, bands)
        else:
            feats = grid.reshape(CLASS_COUNT, bands, rows, w).mean(axis=(2, 3))
        per_frame.append(feats)

    stacked = np.stack(per_frame, axis=1)  # (13, s, bands)
    return stacked[np.newaxis, :, :, :, np.newaxis].astype(np.float64)


def temporal_pool(f: np.ndarray) -> np.ndarray:
    """Element-wise max over the frame axis: (n, c, s, h, w) -> (n, c, h, w)."""
    if f.ndim != 5:
        raise PoolingError(f"expected a 5-d (n, c, s, h, w) tensor, got {f.ndim}-d")
    return f.max(axis=2)


def horizontal_pool(z: np.ndarray, stripes: int) -> np.ndarray:
    """Per stripe and channel: max + mean over the stripe block; (n, c, h, w) -> (n, stripes, c)."""
    if z.ndim != 4:
        raise PoolingError(f"expected a 4-d (n, c, h, w) tensor, got {z.ndim}-d")
    n, c, h, w = z.shape
    if stripes < 1 or h % stripes != 0:
        raise PoolingError(f"height {h} is not divisible into {stripes} stripes")
    blocks = z.reshape(n, c, stripes, h // stripes, w)
    pooled = blocks.max(axis=(3, 4)) + blocks.mean(axis=(3, 4))  # (n, c, stripes)
    return pooled.transpose(0, 2, 1)


@dataclass(frozen=True, eq=False)
class EmbeddingHead:
    """Linear map plus per-dimension standardization and learned affine.

    The standardization/affine pair plays the normalization-neck role:
    pre-normalization features feed the metric branch, post-normalization
    features feed classification.  Only the inference-time transform is
    modeled; statistics are supplied, not learned.
    """

    weight: np.ndarray  # (d, in_dim)
    running_mean: np.ndarray  # (d,)
    running_var: np.ndarray  # (d,), strictly positive
    gamma: np.ndarray  # (d,)
    beta: np.ndarray  # (d,)

    def __post_init__(self):
        d = self.weight.shape[0]
        for name in ("running_mean", "running_var", "gamma", "beta"):
            vec = getattr(self, name)
            if vec.shape != (d,):
                raise EmbedError(f"{name} must have shape ({d},), got {vec.shape}")
        if np.any(self.running_var <= 0):
            raise EmbedError("running_var must be strictly positive")


def identity_head(dim: int) -> EmbeddingHead:
    """Pass-through head: identity weights, zero-mean/unit-var stats, identity affine."""
    return EmbeddingHead(
        weight=np.eye(dim),
        running_mean=np.zeros(dim),
        running_var=np.ones(dim),
        gamma=np.ones(dim),
        beta=np.zeros(dim),
    )


def standardizing_head(features: np.ndarray, var_floor: float = 1e-12) -> EmbeddingHead:
    """Identity-weight head whose statistics standardize the given population."""
    feats = features.reshape(features.shape[0], -1)
    dim = feats.shape[1]
    return EmbeddingHead(
        weight=np.eye(dim),
        running_mean=feats.mean(axis=0),
        running_var=np.maximum(feats.var(axis=0), var_floor),
        gamma=np.ones(dim),
        beta=np.zeros(dim),
    )


def embed(f_prime: np.ndarray, head: EmbeddingHead) -> np.ndarray:
    """Flatten stripe features, apply the linear map, standardize, apply the affine."""
    flat = f_prime.reshape(f_prime.shape[0], -1)
    if flat.shape[1] != head.weight.shape[1]:
        raise EmbedError(
            f"flattened feature dim {flat.shape[1]} does not match weights {head.weight.shape}"
        )
    projected = flat @ head.weight.T
    standardized = (projected - head.running_mean) / np.sqrt(head.running_var)
    return head.gamma * standardized + head.beta


def cross_entropy(predicted: np.ndarray, label: int) -> float:
    """-log(p[label]) for a probability vector; 0 exactly at a correct one-hot."""
    predicted = np.asarray(predicted, dtype=np.float64)
    if predicted.ndim != 1:
        raise LossError("predicted must be a 1-d probability vector")
    if np.any(predicted < 0):
        raise LossError("predicted probabilities must be non-negative")
    if abs(predicted.sum() - 1.0) > 1e-6:
        raise LossError(f"predicted probabilities sum to {predicted.sum()}, not 1")
    if not 0 <= label < predicted.shape[0]:
        raise LossError(f"label {label} outside 0..{predicted.shape[0] - 1}")
    with np.errstate(divide="ignore"):
        return float(-np.log(predicted[label]))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def cross_entropy_from_logits(logits: np.ndarray, label: int) -> float:
    shifted = logits - logits.max()
    return float(np.log(np.exp(shifted).sum()) - shifted[label])


def cross_entropy_gradient(logits: np.ndarray, label: int) -> np.ndarray:
    """Gradient of -log softmax(logits)[label] w.r.t. the logits."""
    grad = softmax(np.asarray(logits, dtype=np.float64))
    grad[label] -= 1.0
    return grad


@dataclass(frozen=True, eq=False)
class TripletBatch:
    anchors: np.ndarray  # (N, d)
    positives: np.ndarray  # (N, d)
    negatives: np.ndarray  # (N, d)
    anchor_ids: np.ndarray  # (N,)
    negative_ids: np.ndarray  # (N,)
    margin: float = 0.2

    def __post_init__(self):
        if not (self.anchors.shape == self.positives.shape == self.negatives.shape):
            raise LossError("anchor/positive/negative embeddings must share a shape")
        if self.margin <= 0:
            raise LossError(f"margin must be positive, got {self.margin}")
        for arr in (self.anchors, self.positives, self.negatives):
            if not np.all(np.isfinite(arr)):
                raise LossError("embeddings must be finite")
        if np.any(self.anchor_ids == self.negative_ids):
            raise LossError("negatives must carry a different identity than their anchor")


def _squared_distances(batch: TripletBatch):
    d_ap = ((batch.anchors - batch.positives) ** 2).sum(axis=1)
    d_an = ((batch.anchors - batch.negatives) ** 2).sum(axis=1)
    return d_ap, d_an


def triplet_loss(batch: TripletBatch) -> float:
    """Sum over triplets of max(0, d2(a,p) - d2(a,n) + margin)."""
    d_ap, d_an = _squared_distances(batch)
    return float(np.maximum(0.0, d_ap - d_an + batch.margin).sum())


def triplet_gradient(batch: TripletBatch, kink_tolerance: float = KINK_TOLERANCE):
    """Analytic gradients (d_anchor, d_positive, d_negative); raises at hinge kinks."""
    d_ap, d_an = _squared_distances(batch)
    args = d_ap - d_an + batch.margin
    near_kink = np.abs(args) <= kink_tolerance
    if np.any(near_kink):
        idx = int(np.argmax(near_kink))
        raise NonDifferentiableError(
            f"triplet {idx} sits within {kink_tolerance} of the hinge kink (arg={args[idx]})"
        )
    active = (args > 0)[:, np.newaxis].astype(np.float64)
    grad_anchor = 2.0 * (batch.negatives - batch.positives) * active
    grad_positive = -2.0 * (batch.anchors - batch.positives) * active
    grad_negative = 2.0 * (batch.anchors - batch.negatives) * active
    return grad_anchor, grad_positive, grad_negative


@dataclass(frozen=True, eq=False)
class EvalSet:
    """Embeddings with identity labels; optional sample ids for self-match exclusion."""

    embeddings: np.ndarray  # (n, d)
    identities: np.ndarray  # (n,)
    sample_ids: np.ndarray | None = None

    def __post_init__(self):
        if self.embeddings.ndim != 2:
            raise EvaluationError("embeddings must be a 2-d (n, d) array")
        if len(self.identities) != self.embeddings.shape[0]:
            raise EvaluationError("one identity label per embedding required")
        if self.sample_ids is not None and len(self.sample_ids) != self.embeddings.shape[0]:
            raise EvaluationError("one sample id per embedding required")

    def __len__(self) -> int:
        return self.embeddings.shape[0]


@dataclass(frozen=True)
class EvalReport:
    rank: dict[int, float]  # Rank-k accuracy per requested k
    mean_ap: float
    mean_inp: float
    num_probes: int
    num_gallery: int

    def as_dict(self) -> dict:
        out = {f"rank{k}": v for k, v in sorted(self.rank.items())}
        out.update(
            mAP=self.mean_ap,
            mINP=self.mean_inp,
            probes=self.num_probes,
            gallery=self.num_gallery,
        )
        return out


def evaluate(gallery: EvalSet, probe: EvalSet, ks: tuple[int, ...] = (1, 5)) -> EvalReport:
    """Euclidean-distance retrieval: Rank-k, mAP, and mINP over all probes.

    Ties are broken by gallery insertion order.  When both sets carry sample
    ids, gallery entries sharing a probe's sample id are excluded from that
    probe's ranking (same-physical-set protocol); without ids every gallery
    item competes, so running a set against itself scores Rank-1 = 1 by the
    zero self-distance.
    """
    if len(gallery) == 0:
        raise EvaluationError("gallery is empty")
    gal_ids = np.asarray(gallery.identities)
    probe_ids = np.asarray(probe.identities)
    missing = sorted(set(probe_ids.tolist()) - set(gal_ids.tolist()))
    if missing:
        raise EvaluationError(f"probe identities absent from gallery: {missing}")

    diffs = probe.embeddings[:, np.newaxis, :] - gallery.embeddings[np.newaxis, :, :]
    dist2 = (diffs * diffs).sum(axis=2)  # squared euclidean preserves the ranking

    exclude_ids = gallery.sample_ids is not None and probe.sample_ids is not None
    hits = {k: 0 for k in ks}
    ap_values = []
    inp_values = []
    for i in range(len(probe)):
        row = dist2[i]
        keep = np.ones(len(gallery), dtype=bool)
        if exclude_ids:
            keep = np.asarray(gallery.sample_ids) != np.asarray(probe.sample_ids)[i]
        kept_rows = row[keep]
        order = np.argsort(kept_rows, kind="stable")
        matches = (gal_ids[keep][order] == probe_ids[i]).astype(np.int64)
        if not matches.any():
            raise EvaluationError(
                f"probe {i} (identity {probe_ids[i]!r}) has no gallery match after exclusion"
            )
        for k in ks:
            if matches[:k].any():
                hits[k] += 1
        cum = matches.cumsum()
        num_pos = int(cum[-1])
        precision_at_hits = cum[matches == 1] / (np.nonzero(matches)[0] + 1)
        ap_values.append(precision_at_hits.sum() / num_pos)
        last_pos = int(np.nonzero(matches)[0][-1])
        inp_values.append(num_pos / (last_pos + 1))

    n = len(probe)
    return EvalReport(
        rank={k: hits[k] / n for k in ks},
        mean_ap=float(np.mean(ap_values)),
        mean_inp=float(np.mean(inp_values)),
        num_probes=n,
        num_gallery=len(gallery),
    )
