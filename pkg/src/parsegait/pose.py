"""COCO17 keypoint sequences: file I/O, validity filtering, coordinate alignment.

Keypoints stay continuous throughout; discretization happens only inside the
rasterizer's pixel-membership tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import AlignmentError, KeypointParseError, KeypointSchemaError

JOINT_COUNT = 17

JOINT_NAMES = (
    "nose", "l-eye", "r-eye", "l-ear", "r-ear",
    "l-shoulder", "r-shoulder", "l-elbow", "r-elbow",
    "l-wrist", "r-wrist", "l-hip", "r-hip",
    "l-knee", "r-knee", "l-ankle", "r-ankle",
)

FILE_HEADER = "coco17 v1"


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"keypoint coordinates must be finite, got ({self.x}, {self.y})")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class KeypointFrame:
    joints: tuple[Keypoint, ...]
    frame_index: int

    def __post_init__(self):
        if len(self.joints) != JOINT_COUNT:
            raise KeypointSchemaError(
                f"frame {self.frame_index}: expected {JOINT_COUNT} joints, got {len(self.joints)}"
            )
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be >= 0, got {self.frame_index}")


@dataclass(frozen=True)
class KeypointSequence:
    frames: tuple[KeypointFrame, ...]
    sequence_id: str

    def __post_init__(self):
        if not self.frames:
            raise ValueError("a keypoint sequence needs at least one frame")
        indices = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError(f"frame indices must be strictly increasing, got {indices}")


@dataclass(frozen=True)
class ValidityConfig:
    tau: float
    width: int
    height: int

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"canvas must be at least 1x1, got {self.height}x{self.width}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle; origin (x, y), extent (width, height)."""

    x: float
    y: float
    width: float
    height: float


JointSet = Union[KeypointFrame, Mapping[int, Keypoint], Iterable[tuple[int, Keypoint]]]


def _as_items(joints: JointSet):
    if isinstance(joints, KeypointFrame):
        return enumerate(joints.joints)
    if isinstance(joints, Mapping):
        return joints.items()
    return joints


def filter_valid(joints: JointSet, cfg: ValidityConfig) -> dict[int, Keypoint]:
    """Keep joint i iff 0 <= x < W, 0 <= y < H and confidence >= tau (inclusive)."""
    return {
        i: kp
        for i, kp in _as_items(joints)
        if 0.0 <= kp.x < cfg.width and 0.0 <= kp.y < cfg.height and kp.confidence >= cfg.tau
    }


def align_keypoints(frame: KeypointFrame, source_box: Box, target_box: Box) -> KeypointFrame:
    """Map joints by the affine transform sending source_box onto target_box."""
    if source_box.width <= 0 or source_box.height <= 0:
        raise AlignmentError(f"degenerate source box {source_box}")
    if target_box.width <= 0 or target_box.height <= 0:
        raise AlignmentError(f"degenerate target box {target_box}")
    sx = target_box.width / source_box.width
    sy = target_box.height / source_box.height
    joints = tuple(
        Keypoint(
            x=target_box.x + (kp.x - source_box.x) * sx,
            y=target_box.y + (kp.y - source_box.y) * sy,
            confidence=kp.confidence,
        )
        for kp in frame.joints
    )
    return KeypointFrame(joints=joints, frame_index=frame.frame_index)


def joint_bounding_box(frame: KeypointFrame, tau: float) -> Box:
    """Tight bounding box of the joints with confidence >= tau."""
    pts = [kp for kp in frame.joints if kp.confidence >= tau]
    if not pts:
        raise AlignmentError(f"frame {frame.frame_index}: no joints with confidence >= {tau}")
    xs = [kp.x for kp in pts]
    ys = [kp.y for kp in pts]
    return Box(x=min(xs), y=min(ys), width=max(xs) - min(xs), height=max(ys) - min(ys))


def mask_bounding_box(mask: np.ndarray) -> Box:
    """Tight bounding box of a binary mask's foreground, in full-pixel extents."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise AlignmentError("silhouette mask has no foreground pixels")
    return Box(
        x=float(xs.min()),
        y=float(ys.min()),
        width=float(xs.max() - xs.min() + 1),
        height=float(ys.max() - ys.min() + 1),
    )


def load_keypoint_sequence(path, sequence_id: str | None = None) -> KeypointSequence:
    """Read a `coco17 v1` keypoint file; every joint is preserved verbatim."""
    path = Path(path)
    if sequence_id is None:
        sequence_id = path.parent.name or path.stem
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise KeypointParseError(f"{path}: empty file, expected '{FILE_HEADER} <N>' header")
    header = lines[0].split()
    if len(header) != 3 or " ".join(header[:2]) != FILE_HEADER:
        raise KeypointParseError(f"{path}:1: bad header {lines[0]!r}, expected '{FILE_HEADER} <N>'")
    try:
        n_frames = int(header[2])
    except ValueError:
        raise KeypointParseError(f"{path}:1: frame count {header[2]!r} is not an integer") from None
    records = [ln for ln in lines[1:] if ln.strip()]
    if len(records) != n_frames:
        raise KeypointParseError(
            f"{path}: header declares {n_frames} frames but file has {len(records)} records"
        )

    frames = []
    for lineno, line in enumerate(records, start=2):
        tokens = line.split()
        if (len(tokens) - 1) % 3 != 0:
            raise KeypointParseError(f"{path}:{lineno}: record has {len(tokens)} fields")
        n_joints = (len(tokens) - 1) // 3
        if n_joints != JOINT_COUNT:
            raise KeypointSchemaError(
                f"{path}:{lineno}: record carries {n_joints} joints, expected {JOINT_COUNT}"
            )
        try:
            frame_index = int(tokens[0])
            joints = tuple(
                Keypoint(float(tokens[1 + 3 * j]), float(tokens[2 + 3 * j]), float(tokens[3 + 3 * j]))
                for j in range(JOINT_COUNT)
            )
        except ValueError as exc:
            raise KeypointParseError(f"{path}:{lineno}: {exc}") from None
        frames.append(KeypointFrame(joints=joints, frame_index=frame_index))

    try:
        return KeypointSequence(frames=tuple(frames), sequence_id=sequence_id)
    except ValueError as exc:
        raise KeypointParseError(f"{path}: {exc}") from None


def save_keypoint_sequence(seq: KeypointSequence, path) -> None:
    """Write the `coco17 v1` format; floats use shortest round-trip repr."""
    path = Path(path)
    lines = [f"{FILE_HEADER} {len(seq.frames)}"]
    for frame in seq.frames:
        fields = [str(frame.frame_index)]
        for kp in frame.joints:
            fields.extend((repr(kp.x), repr(kp.y), repr(kp.confidence)))
        lines.append(" ".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
