"""Pixel-class information entropy of a representation.

p_k is the empirical (maximum-likelihood) pixel frequency of class k over the
analyzed raster set; log base 2, so a balanced binary silhouette measures
exactly one bit.  Zero-frequency classes contribute zero (the analytic limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import AnalysisError
from .render import CLASS_COUNT, LabelRaster


@dataclass(frozen=True, eq=False)
class ClassHistogram:
    counts: np.ndarray  # int64, length 13

    def __post_init__(self):
        if self.counts.shape != (CLASS_COUNT,):
            raise ValueError(f"histogram needs {CLASS_COUNT} bins, got shape {self.counts.shape}")
        if np.any(self.counts < 0):
            raise ValueError("histogram counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def class_histogram(rasters: Iterable[LabelRaster]) -> ClassHistogram:
    """Pixel count per class across all rasters."""
    counts = np.zeros(CLASS_COUNT, dtype=np.int64)
    n = 0
    for raster in rasters:
        labels = raster.labels if isinstance(raster, LabelRaster) else raster
        counts += np.bincount(labels.ravel(), minlength=CLASS_COUNT)
        n += 1
    if n == 0:
        raise AnalysisError("cannot build a class histogram from an empty raster collection")
    return ClassHistogram(counts=counts)


def merge_histograms(histograms: Iterable[ClassHistogram]) -> ClassHistogram:
    """Histogram accumulation is additive, so partial histograms merge exactly."""
    total = np.zeros(CLASS_COUNT, dtype=np.int64)
    n = 0
    for hist in histograms:
        total += hist.counts
        n += 1
    if n == 0:
        raise AnalysisError("cannot merge an empty histogram collection")
    return ClassHistogram(counts=total)


def entropy_bits(hist: ClassHistogram) -> float:
    """H = -sum p_k log2 p_k over classes with p_k > 0; bounded by log2(13)."""
    total = hist.total
    if total < 1:
        raise AnalysisError("entropy over an empty histogram is undefined")
    h = 0.0
    for count in hist.counts:
        if count > 0:
            p = count / total
            h -= p * math.log2(p)
    return h


def class_shares(hist: ClassHistogram) -> list[float]:
    total = hist.total
    if total < 1:
        raise AnalysisError("class shares over an empty histogram are undefined")
    return [int(c) / total for c in hist.counts]


MAX_ENTROPY_BITS = math.log2(CLASS_COUNT)
