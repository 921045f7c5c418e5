"""Throughput benchmark: render + fuse per frame, per kernel backend.

Measures the preprocessing path a real dataset run takes per frame: paint
the parsing raster at native size, fuse with the silhouette, resize to
target.  Reported per backend so the compiled extension can be compared
against the numpy fallback on the same frames.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import PipelineConfig
from .fuse import SilhouetteMask, fuse_frame
from .render import default_part_mapping, render_parsing_skeleton
from .synth import DEFAULT_CANVAS, derive_walker, generate_clip


@dataclass(frozen=True)
class BenchResult:
    backend: str
    frames: int
    seconds: float

    @property
    def ms_per_frame(self) -> float:
        return 1000.0 * self.seconds / self.frames

    @property
    def frames_per_second(self) -> float:
        return self.frames / self.seconds if self.seconds > 0 else float("inf")


@contextmanager
def _backend(name: str | None):
    if name is None:
        yield
        return
    previous = kernels.use_backend(name)
    try:
        yield
    finally:
        kernels.use_backend(previous)


def _bench_frames(frames: int, cfg: PipelineConfig):
    params = derive_walker(np.random.default_rng([cfg.seed, 0]))
    clip = generate_clip(
        params, "bench", "nm", 0, frames, np.random.default_rng([cfg.seed, 1]), DEFAULT_CANVAS
    )
    return list(zip(clip.keypoints.frames, clip.silhouettes))


def measure_throughput(
    cfg: PipelineConfig,
    frames: int = 300,
    backend: str | None = None,
    repeats: int = 1,
) -> BenchResult:
    """Time render+fuse over synthetic frames; returns the best of `repeats` passes."""
    pairs = _bench_frames(frames, cfg)
    mapping = default_part_mapping()
    render_cfg = cfg.render_config(DEFAULT_CANVAS)
    with _backend(backend):
        name = kernels.BACKEND
        best = float("inf")
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            for frame, sil in pairs:
                parsing = render_parsing_skeleton(frame, mapping, render_cfg)
                fuse_frame(parsing, SilhouetteMask(sil), cfg.strategy, cfg.target_size)
            best = min(best, time.perf_counter() - start)
    return BenchResult(backend=name, frames=len(pairs), seconds=best)


def compare_backends(cfg: PipelineConfig, frames: int = 300, repeats: int = 2):
    """One BenchResult per available backend, measured on identical frames."""
    return [
        measure_throughput(cfg, frames=frames, backend=name, repeats=repeats)
        for name in kernels.available_backends()
    ]
