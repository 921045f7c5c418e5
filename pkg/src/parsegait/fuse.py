"""Fusion of skeleton rasters with silhouettes.

Two strategies: composite fusion (CRF) overlays the skeleton classes onto the
silhouette in one label image; channel fusion (DCF) gives every class its own
binary channel with the silhouette as channel 1.  Both feed the 64x44 resize.
Labels are categorical, so resampling is strictly nearest-neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .errors import FusionError
from .render import CLASS_COUNT, LabelRaster

TARGET_SIZE = (64, 44)  # (H, W) network input

STRATEGIES = ("crf", "dcf")


@dataclass(frozen=True, eq=False)
class SilhouetteMask:
    mask: np.ndarray  # uint8 (H, W), values in {0, 1}

    def __post_init__(self):
        if self.mask.ndim != 2 or self.mask.dtype != np.uint8:
            raise ValueError("mask must be a 2-d uint8 grid")
        if self.mask.size and self.mask.max() > 1:
            raise ValueError("mask values must be 0 or 1")

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]


@dataclass(frozen=True, eq=False)
class FusedSample:
    strategy: str
    crf: LabelRaster | None = None
    dcf: np.ndarray | None = None  # uint8 (13, H, W), binary channels

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if (self.crf is None) == (self.dcf is None):
            raise ValueError("exactly one of crf/dcf must be populated")
        if self.strategy == "crf" and self.crf is None:
            raise ValueError("crf strategy requires a label raster")
        if self.strategy == "dcf":
            if self.dcf is None:
                raise ValueError("dcf strategy requires a channel stack")
            if self.dcf.ndim != 3 or self.dcf.shape[0] != CLASS_COUNT:
                raise ValueError(f"dcf stack must have {CLASS_COUNT} channels")
            if self.dcf.dtype != np.uint8 or (self.dcf.size and self.dcf.max() > 1):
                raise ValueError("dcf channels must be binary uint8")


def _check_dims(parsing: LabelRaster, sil: SilhouetteMask) -> None:
    if parsing.labels.shape != sil.mask.shape:
        raise FusionError(
            f"dimension mismatch: parsing {parsing.labels.shape} vs silhouette {sil.mask.shape}"
        )
    if parsing.labels.size and np.any(parsing.labels == 1):
        raise FusionError("parsing raster carries class 1, which is reserved for the silhouette")


def fuse_crf(parsing: LabelRaster, sil: SilhouetteMask) -> LabelRaster:
    """Skeleton class where present, else silhouette class 1, else background."""
    _check_dims(parsing, sil)
    out = np.empty(parsing.labels.shape, dtype=np.uint8)
    kernels.fuse_crf(np.ascontiguousarray(parsing.labels), np.ascontiguousarray(sil.mask), out)
    return LabelRaster(labels=out)


def fuse_dcf(parsing: LabelRaster, sil: SilhouetteMask) -> np.ndarray:
    """13-channel binary stack: background, silhouette, one channel per skeleton class."""
    _check_dims(parsing, sil)
    out = np.empty((CLASS_COUNT,) + parsing.labels.shape, dtype=np.uint8)
    kernels.fuse_dcf(np.ascontiguousarray(parsing.labels), np.ascontiguousarray(sil.mask), out)
    return out


def collapse_dcf(stack: np.ndarray) -> LabelRaster:
    """Reproduce the CRF raster from a DCF stack.

    Precedence: highest-index non-zero skeleton channel (they are disjoint by
    construction), else silhouette, else background.
    """
    labels = np.zeros(stack.shape[1:], dtype=np.uint8)
    labels[stack[1] != 0] = 1
    for k in range(2, stack.shape[0]):
        labels[stack[k] != 0] = k
    return LabelRaster(labels=labels)


def resize_labels(sample, target: tuple[int, int] = TARGET_SIZE):
    """Nearest-neighbor resize of a LabelRaster or a DCF stack to (H, W)."""
    th, tw = target
    if th < 1 or tw < 1:
        raise ValueError(f"target size must be positive, got {target}")
    if isinstance(sample, LabelRaster):
        dst = np.empty((th, tw), dtype=np.uint8)
        kernels.resize_nearest(np.ascontiguousarray(sample.labels), dst)
        return LabelRaster(labels=dst)
    stack = np.asarray(sample)
    dst = np.empty((stack.shape[0], th, tw), dtype=np.uint8)
    for k in range(stack.shape[0]):
        kernels.resize_nearest(np.ascontiguousarray(stack[k]), dst[k])
    return dst


def fuse_frame(
    parsing: LabelRaster, sil: SilhouetteMask, strategy: str, target=TARGET_SIZE
) -> FusedSample:
    """Fuse at native resolution, then resize to the network input size."""
    if strategy == "crf":
        return FusedSample(strategy="crf", crf=resize_labels(fuse_crf(parsing, sil), target))
    if strategy == "dcf":
        return FusedSample(strategy="dcf", dcf=resize_labels(fuse_dcf(parsing, sil), target))
    raise FusionError(f"unknown fusion strategy {strategy!r}, expected one of {STRATEGIES}")


def silhouette_to_labels(sil: SilhouetteMask) -> LabelRaster:
    """Lift a binary silhouette to the class domain {0, 1} (the fusion baseline)."""
    return LabelRaster(labels=sil.mask.copy())


def save_silhouette(sil: SilhouetteMask, path) -> None:
    """Persist as 8-bit PNG with foreground 255 (the usual silhouette convention)."""
    Image.fromarray(sil.mask * np.uint8(255), mode="L").save(Path(path), format="PNG")


def load_silhouette(path) -> SilhouetteMask:
    arr = np.asarray(Image.open(Path(path)).convert("L"))
    return SilhouetteMask(mask=(arr > 0).astype(np.uint8))
