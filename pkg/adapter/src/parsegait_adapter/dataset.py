"""Iterable dataset over fused sequence outputs on disk.

The producing toolkit lays a dataset out as:

    <root>/manifest                              header plus one line per sequence
    <root>/out/<sequence_id>/crf/<frame>.png     fused class rasters, one per frame
    <root>/out/<sequence_id>/dcf/<frame>.tns     fused channel stacks, one per frame

`open_dataset` walks the manifest, confirms that every frame file for the
requested strategy exists, and returns a dataset that decodes lazily:
opening is cheap, pixel data is read and validated only when a sample is
accessed.  Frames are stacked in index order with no other transformation,
so augmentation and batching stay in the consumer's hands.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .container import read_container
from .errors import AdapterError

MANIFEST_HEADER = "parsegait-dataset v1"
CLASS_COUNT = 13
STRATEGIES = {"crf": ".png", "dcf": ".tns"}


@dataclass(frozen=True)
class SequenceEntry:
    """One manifest row plus the frame files backing it."""

    sequence_id: str
    identity: str
    frame_paths: tuple[Path, ...]


@dataclass(frozen=True)
class AdapterDataset:
    """Map-style view over fused sequences: `len`, integer indexing, and
    iteration over (sample, identity) pairs.

    Samples are `(frames, height, width)` class-id arrays for the `crf`
    strategy and `(channels, frames, height, width)` stacks for `dcf`.
    The dataset holds only paths and never mutates them, so concurrent
    loader workers may share one instance.
    """

    root: Path
    strategy: str
    entries: tuple[SequenceEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> tuple[np.ndarray, str]:
        entry = self.entries[index]
        frames = [_decode_frame(path, self.strategy) for path in entry.frame_paths]
        shapes = {frame.shape for frame in frames}
        if len(shapes) != 1:
            raise AdapterError(
                f"sequence {entry.sequence_id}: frame shapes differ: {sorted(shapes)}"
            )
        # class rasters gain a leading time axis; channel stacks keep
        # channels first and take time as the second axis
        axis = 0 if self.strategy == "crf" else 1
        return np.stack(frames, axis=axis), entry.identity

    def __iter__(self):
        for index in range(len(self.entries)):
            yield self[index]

    def sequence_ids(self) -> tuple[str, ...]:
        return tuple(entry.sequence_id for entry in self.entries)


def _decode_frame(path: Path, strategy: str) -> np.ndarray:
    if strategy == "crf":
        arr = np.asarray(Image.open(path).convert("L"), dtype=np.uint8)
        if arr.size and arr.max() >= CLASS_COUNT:
            raise AdapterError(
                f"{path}: pixel values exceed class id range 0..{CLASS_COUNT - 1}"
            )
        return arr
    return read_container(path)


def _parse_manifest(path: Path) -> list[tuple[str, str, int]]:
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        head = lines[0].strip() if lines else ""
        raise AdapterError(f"{path}:1: expected header {MANIFEST_HEADER!r}, got {head!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 5:
            raise AdapterError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        sequence_id, identity, _condition, _split, frames = fields
        try:
            count = int(frames)
        except ValueError:
            raise AdapterError(
                f"{path}:{lineno}: frame count {frames!r} is not an integer"
            ) from None
        if count < 1:
            raise AdapterError(f"{path}:{lineno}: sequence {sequence_id} lists {count} frames")
        rows.append((sequence_id, identity, count))
    return rows


def open_dataset(root, strategy: str) -> AdapterDataset:
    """Open the fused outputs under `root` for one strategy.

    The manifest and the existence of every frame file are checked up
    front; file contents are validated lazily on first access.
    """
    root = Path(root)
    if strategy not in STRATEGIES:
        known = ", ".join(sorted(STRATEGIES))
        raise AdapterError(f"unknown strategy {strategy!r}; available strategies: {known}")
    manifest = root / "manifest"
    if not manifest.is_file():
        raise AdapterError(
            f"no manifest at {manifest}; run 'parsegait synth {root}' to create a dataset"
        )
    suffix = STRATEGIES[strategy]
    entries = []
    for sequence_id, identity, frames in _parse_manifest(manifest):
        directory = root / "out" / sequence_id / strategy
        paths = tuple(directory / f"{index:06d}{suffix}" for index in range(frames))
        missing = sum(1 for p in paths if not p.is_file())
        if missing:
            raise AdapterError(
                f"sequence {sequence_id}: {missing} of {frames} {strategy} frames "
                f"missing under {directory}; run 'parsegait render {root}' then "
                f"'parsegait fuse {root} --strategy {strategy}'"
            )
        entries.append(SequenceEntry(sequence_id, identity, paths))
    return AdapterDataset(root=root, strategy=strategy, entries=tuple(entries))
