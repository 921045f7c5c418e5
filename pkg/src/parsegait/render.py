"""Part-labeled skeleton rasterization.

A filtered keypoint frame becomes a label grid: filled circles for the head,
capsule-shaped thick segments for torso/limbs, one class id per body part.
Pixel membership is decided at pixel centers (px + 0.5, py + 0.5), which keeps
the geometry resolution-independent and exactly checkable against a
brute-force distance oracle.

Class ids (fixed):
    0 background, 1 silhouette foreground (assigned during fusion, never
    here), 2 head, 3 torso, 4 neck, 5/6 l/r upper arm, 7/8 l/r forearm,
    9/10 l/r thigh, 11/12 l/r shin.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from . import kernels
from .errors import FusionError
from .pose import KeypointFrame, ValidityConfig, filter_valid

CLASS_COUNT = 13

CLASS_NAMES = (
    "background", "silhouette", "head", "torso", "neck",
    "l-upper-arm", "r-upper-arm", "l-forearm", "r-forearm",
    "l-thigh", "r-thigh", "l-shin", "r-shin",
)

# Fixed preview palette; class 0 is black, all entries distinct.
DEFAULT_PALETTE = (
    (0, 0, 0),        # background
    (255, 255, 255),  # silhouette
    (220, 20, 60),    # head
    (0, 128, 0),      # torso
    (255, 165, 0),    # neck
    (30, 144, 255),   # l-upper-arm
    (0, 0, 139),      # r-upper-arm
    (0, 255, 255),    # l-forearm
    (138, 43, 226),   # r-forearm
    (255, 255, 0),    # l-thigh
    (255, 0, 255),    # r-thigh
    (50, 205, 50),    # l-shin
    (165, 42, 42),    # r-shin
)

# An endpoint is a joint id, or a tuple of joint ids whose mean is used
# (the neck anchors at the shoulder midpoint).
Endpoint = Union[int, tuple[int, ...]]


@dataclass(frozen=True)
class BodyPart:
    class_id: int
    kind: str  # "circles" | "segments"
    strokes: tuple

    def joint_ids(self) -> frozenset[int]:
        out = set()
        for stroke in self.strokes:
            ends = (stroke,) if self.kind == "circles" else stroke
            for end in ends:
                out.update((end,) if isinstance(end, int) else end)
        return frozenset(out)


@dataclass(frozen=True)
class PartMapping:
    """Skeleton parts in draw order (lowest z first; later parts overwrite)."""

    parts: tuple[BodyPart, ...]

    def __post_init__(self):
        ids = sorted(p.class_id for p in self.parts)
        if ids != list(range(2, CLASS_COUNT)):
            raise ValueError(f"part mapping must cover class ids 2..12 exactly once, got {ids}")
        for part in self.parts:
            if part.kind not in ("circles", "segments"):
                raise ValueError(f"unknown part kind {part.kind!r}")
            bad = [j for j in part.joint_ids() if not 0 <= j <= 16]
            if bad:
                raise ValueError(f"part {part.class_id} references joints outside 0..16: {bad}")


def default_part_mapping(head_joints: tuple[int, int, int] = (0, 1, 2)) -> PartMapping:
    """COCO17 limb topology; the head circle centers default to nose + both eyes."""
    return PartMapping(parts=(
        BodyPart(3, "segments", ((5, 6), (11, 12), (5, 11), (6, 12))),
        BodyPart(4, "segments", (((5, 6), 0),)),
        BodyPart(9, "segments", ((11, 13),)),
        BodyPart(10, "segments", ((12, 14),)),
        BodyPart(11, "segments", ((13, 15),)),
        BodyPart(12, "segments", ((14, 16),)),
        BodyPart(5, "segments", ((5, 7),)),
        BodyPart(6, "segments", ((6, 8),)),
        BodyPart(7, "segments", ((7, 9),)),
        BodyPart(8, "segments", ((8, 10),)),
        BodyPart(2, "circles", tuple(head_joints)),
    ))


@dataclass(frozen=True)
class RenderConfig:
    radius: float = 10.0
    line_width: float = 12.0
    tau: float = 0.3
    canvas: tuple[int, int] = (128, 88)  # (H, W)

    def __post_init__(self):
        if self.radius < 1 or self.line_width < 1:
            raise ValueError(
                f"radius and line_width must be >= 1, got {self.radius}/{self.line_width}"
            )
        if self.canvas[0] < 1 or self.canvas[1] < 1:
            raise ValueError(f"canvas must be positive, got {self.canvas}")


@dataclass(frozen=True, eq=False)
class LabelRaster:
    labels: np.ndarray  # uint8 (H, W), values in 0..12

    def __post_init__(self):
        if self.labels.ndim != 2 or self.labels.dtype != np.uint8:
            raise ValueError("labels must be a 2-d uint8 grid")
        if self.labels.size and self.labels.max() >= CLASS_COUNT:
            raise ValueError(f"label values must lie in 0..{CLASS_COUNT - 1}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def rasterize_circle(center, radius, canvas) -> set[tuple[int, int]]:
    """Pixels (px, py) whose center lies within `radius` of `center`."""
    h, w = canvas
    mask = np.zeros((h, w), dtype=np.uint8)
    kernels.paint_disc(mask, float(center[0]), float(center[1]), float(radius), 1)
    ys, xs = np.nonzero(mask)
    return set(zip(xs.tolist(), ys.tolist()))


def rasterize_segment(a, b, width, canvas) -> set[tuple[int, int]]:
    """Pixels whose center lies within width/2 of the closed segment ab (capsule)."""
    h, w = canvas
    mask = np.zeros((h, w), dtype=np.uint8)
    kernels.paint_capsule(
        mask, float(a[0]), float(a[1]), float(b[0]), float(b[1]), float(width) / 2.0, 1
    )
    ys, xs = np.nonzero(mask)
    return set(zip(xs.tolist(), ys.tolist()))


def _resolve(end: Endpoint, valid) -> tuple[float, float]:
    if isinstance(end, int):
        kp = valid[end]
        return kp.x, kp.y
    xs = [valid[j].x for j in end]
    ys = [valid[j].y for j in end]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def drawn_strokes(frame: KeypointFrame, mapping: PartMapping, cfg: RenderConfig):
    """Strokes the renderer will paint, in z order.

    A part contributes only when every joint it references passes the
    validity filter; partially valid parts are skipped whole.  Yields
    ("disc", (x, y), radius, class_id) and
    ("capsule", (ax, ay, bx, by), half_width, class_id) records.
    """
    h, w = cfg.canvas
    valid = filter_valid(frame, ValidityConfig(tau=cfg.tau, width=w, height=h))
    out = []
    for part in mapping.parts:
        if not part.joint_ids() <= valid.keys():
            continue
        if part.kind == "circles":
            for end in part.strokes:
                x, y = _resolve(end, valid)
                out.append(("disc", (x, y), cfg.radius, part.class_id))
        else:
            for end_a, end_b in part.strokes:
                ax, ay = _resolve(end_a, valid)
                bx, by = _resolve(end_b, valid)
                out.append(("capsule", (ax, ay, bx, by), cfg.line_width / 2.0, part.class_id))
    return out


def render_parsing_skeleton(
    frame: KeypointFrame, mapping: PartMapping, cfg: RenderConfig
) -> LabelRaster:
    """Rasterize a frame into a part-labeled grid (all-background when nothing is valid)."""
    labels = np.zeros(cfg.canvas, dtype=np.uint8)
    for kind, geo, size, class_id in drawn_strokes(frame, mapping, cfg):
        if kind == "disc":
            kernels.paint_disc(labels, geo[0], geo[1], size, class_id)
        else:
            kernels.paint_capsule(labels, geo[0], geo[1], geo[2], geo[3], size, class_id)
    return LabelRaster(labels=labels)


def colorize(raster: LabelRaster, palette=DEFAULT_PALETTE) -> np.ndarray:
    """Per-pixel palette lookup; returns an (H, W, 3) uint8 image."""
    if len(palette) != CLASS_COUNT:
        raise ValueError(f"palette needs exactly {CLASS_COUNT} entries, got {len(palette)}")
    if tuple(palette[0]) != (0, 0, 0):
        raise ValueError("palette entry 0 (background) must be black")
    if len(set(map(tuple, palette))) != CLASS_COUNT:
        raise ValueError("palette colors must be pairwise distinct")
    table = np.asarray(palette, dtype=np.uint8)
    return table[raster.labels]


def save_label_raster(raster: LabelRaster, path) -> None:
    """Persist as 8-bit single-channel PNG, pixel value = class id."""
    Image.fromarray(raster.labels, mode="L").save(Path(path), format="PNG")


def load_label_raster(path) -> LabelRaster:
    arr = np.asarray(Image.open(Path(path)).convert("L"), dtype=np.uint8)
    if arr.size and arr.max() >= CLASS_COUNT:
        raise FusionError(f"{path}: pixel values exceed class id range 0..{CLASS_COUNT - 1}")
    return LabelRaster(labels=arr)


def save_color_preview(raster: LabelRaster, path, palette=DEFAULT_PALETTE) -> None:
    """Persist the colorized raster as 24-bit RGB PNG."""
    Image.fromarray(colorize(raster, palette), mode="RGB").save(Path(path), format="PNG")
