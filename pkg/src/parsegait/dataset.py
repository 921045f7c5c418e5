"""Dataset layout: manifest parsing and on-disk path conventions.

A dataset root holds one `manifest` file plus one directory per sequence:

    <root>/manifest
    <root>/<sequence_id>/keypoints.txt
    <root>/<sequence_id>/sil/<frame:06d>.png

Derived outputs go under `<root>/out/<sequence_id>/<kind>/` so the source
tree stays read-only after generation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ManifestError
from .fuse import load_silhouette
from .pose import KeypointSequence, load_keypoint_sequence

MANIFEST_HEADER = "parsegait-dataset v1"
MANIFEST_NAME = "manifest"
OUT_DIR_NAME = "out"
SPLITS = ("gallery", "probe")


@dataclass(frozen=True)
class SequenceRecord:
    sequence_id: str
    identity: str
    condition: str
    split: str
    frames: int

    def __post_init__(self):
        for name in ("sequence_id", "identity", "condition"):
            value = getattr(self, name)
            if not value or any(ch.isspace() for ch in value):
                raise ManifestError(f"{name} must be non-empty and whitespace-free: {value!r}")
        if self.split not in SPLITS:
            raise ManifestError(
                f"sequence {self.sequence_id}: split must be one of {SPLITS}, got {self.split!r}"
            )
        if self.frames < 1:
            raise ManifestError(f"sequence {self.sequence_id} lists {self.frames} frames")


@dataclass(frozen=True)
class Manifest:
    records: tuple[SequenceRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.sequence_id in seen:
                raise ManifestError(f"duplicate sequence id {rec.sequence_id!r}")
            seen.add(rec.sequence_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def record(self, sequence_id: str) -> SequenceRecord:
        for rec in self.records:
            if rec.sequence_id == sequence_id:
                return rec
        raise ManifestError(f"sequence {sequence_id!r} not in manifest")

    def identities(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(rec.identity for rec in self.records))

    def conditions(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(rec.condition for rec in self.records))

    def gallery(self) -> tuple[SequenceRecord, ...]:
        return tuple(rec for rec in self.records if rec.split == "gallery")

    def probes(self) -> tuple[SequenceRecord, ...]:
        return tuple(rec for rec in self.records if rec.split == "probe")


def manifest_path(root: str | Path) -> Path:
    return Path(root) / MANIFEST_NAME


def keypoints_path(root: str | Path, sequence_id: str) -> Path:
    return Path(root) / sequence_id / "keypoints.txt"


def silhouette_path(root: str | Path, sequence_id: str, frame_index: int) -> Path:
    return Path(root) / sequence_id / "sil" / f"{frame_index:06d}.png"


def output_dir(root: str | Path, sequence_id: str, kind: str) -> Path:
    return Path(root) / OUT_DIR_NAME / sequence_id / kind


def save_manifest(root: str | Path, manifest: Manifest) -> Path:
    path = manifest_path(root)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MANIFEST_HEADER]
    lines += [
        f"{rec.sequence_id} {rec.identity} {rec.condition} {rec.split} {rec.frames}"
        for rec in manifest.records
    ]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def load_manifest(root: str | Path) -> Manifest:
    path = manifest_path(root)
    if not path.is_file():
        raise ManifestError(f"no manifest at {path}")
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        head = lines[0].strip() if lines else ""
        raise ManifestError(f"{path}:1: expected header {MANIFEST_HEADER!r}, got {head!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ManifestError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        seq_id, identity, condition, split, frames = fields
        try:
            frame_count = int(frames)
        except ValueError:
            raise ManifestError(f"{path}:{lineno}: frame count {frames!r} is not an integer")
        records.append(SequenceRecord(seq_id, identity, condition, split, frame_count))
    return Manifest(tuple(records))


def validate_layout(root: str | Path, manifest: Manifest) -> None:
    """Check that every manifest entry's files exist on disk."""
    for rec in manifest.records:
        kp_path = keypoints_path(root, rec.sequence_id)
        if not kp_path.is_file():
            raise ManifestError(f"sequence {rec.sequence_id}: missing {kp_path}")
        sil_dir = silhouette_path(root, rec.sequence_id, 0).parent
        if not sil_dir.is_dir():
            raise ManifestError(f"sequence {rec.sequence_id}: missing directory {sil_dir}")


def load_sequence(root: str | Path, record: SequenceRecord) -> tuple[KeypointSequence, list[np.ndarray]]:
    """Load one sequence's keypoints and silhouettes, cross-checked against the manifest."""
    kp_path = keypoints_path(root, record.sequence_id)
    if not kp_path.is_file():
        raise ManifestError(f"sequence {record.sequence_id}: missing {kp_path}")
    sequence = load_keypoint_sequence(kp_path, sequence_id=record.sequence_id)
    if len(sequence.frames) != record.frames:
        raise ManifestError(
            f"sequence {record.sequence_id}: manifest lists {record.frames} frames, "
            f"keypoint file has {len(sequence.frames)}"
        )
    silhouettes = []
    for frame in sequence.frames:
        sil_path = silhouette_path(root, record.sequence_id, frame.frame_index)
        if not sil_path.is_file():
            raise ManifestError(f"sequence {record.sequence_id}: missing {sil_path}")
        silhouettes.append(load_silhouette(sil_path).mask)
    return sequence, silhouettes
