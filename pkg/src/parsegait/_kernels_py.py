"""Numpy implementation of the raster/fusion kernels.

Fallback backend used when the compiled extension is unavailable.  Float
expressions mirror the compiled kernels operation-for-operation (same
multiply/add order, no fused contractions) so both backends paint
bit-identical pixel sets.
"""

import math

import numpy as np

BACKEND = "python"


def paint_disc(labels, cx, cy, radius, value):
    """Set labels[py, px] = value where the pixel center lies within radius of (cx, cy)."""
    h, w = labels.shape
    x_lo = max(0, int(math.floor(cx - radius)) - 1)
    x_hi = min(w - 1, int(math.ceil(cx + radius)) + 1)
    y_lo = max(0, int(math.floor(cy - radius)) - 1)
    y_hi = min(h - 1, int(math.ceil(cy + radius)) + 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    dx = (np.arange(x_lo, x_hi + 1, dtype=np.float64) + 0.5) - cx
    dy = (np.arange(y_lo, y_hi + 1, dtype=np.float64) + 0.5) - cy
    inside = (dx * dx)[None, :] + (dy * dy)[:, None] <= radius * radius
    sub = labels[y_lo : y_hi + 1, x_lo : x_hi + 1]
    sub[inside] = value


def paint_capsule(labels, ax, ay, bx, by, half_width, value):
    """Set labels[py, px] = value where the pixel center lies within half_width of segment ab."""
    abx = bx - ax
    aby = by - ay
    ab2 = abx * abx + aby * aby
    if ab2 == 0.0:
        paint_disc(labels, ax, ay, half_width, value)
        return
    h, w = labels.shape
    x_lo = max(0, int(math.floor(min(ax, bx) - half_width)) - 1)
    x_hi = min(w - 1, int(math.ceil(max(ax, bx) + half_width)) + 1)
    y_lo = max(0, int(math.floor(min(ay, by) - half_width)) - 1)
    y_hi = min(h - 1, int(math.ceil(max(ay, by) + half_width)) + 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    apx = (np.arange(x_lo, x_hi + 1, dtype=np.float64) + 0.5) - ax
    apy = (np.arange(y_lo, y_hi + 1, dtype=np.float64) + 0.5) - ay
    t = (apx[None, :] * abx + apy[:, None] * aby) / ab2
    np.clip(t, 0.0, 1.0, out=t)
    ddx = apx[None, :] - t * abx
    ddy = apy[:, None] - t * aby
    inside = ddx * ddx + ddy * ddy <= half_width * half_width
    sub = labels[y_lo : y_hi + 1, x_lo : x_hi + 1]
    sub[inside] = value


def fuse_crf(parsing, sil, out):
    """Per pixel: skeleton class where parsing is non-background, else 1 on silhouette, else 0."""
    np.copyto(out, parsing)
    out[(parsing == 0) & (sil != 0)] = 1


def fuse_dcf(parsing, sil, out):
    """Channel 0: neither input; channel 1: silhouette; channels 2..12: per-class indicators."""
    out[0] = (parsing == 0) & (sil == 0)
    out[1] = sil != 0
    for k in range(2, out.shape[0]):
        out[k] = parsing == k


def resize_nearest(src, dst):
    """Nearest-neighbor resample with pixel-center mapping."""
    sh, sw = src.shape
    th, tw = dst.shape
    sy = (((np.arange(th, dtype=np.float64) + 0.5) * sh) / th).astype(np.int64)
    sx = (((np.arange(tw, dtype=np.float64) + 0.5) * sw) / tw).astype(np.int64)
    np.minimum(sy, sh - 1, out=sy)
    np.minimum(sx, sw - 1, out=sx)
    dst[:, :] = src[sy[:, None], sx[None, :]]
