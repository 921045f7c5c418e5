# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled raster/fusion kernels.

Float expressions mirror _kernels_py operation-for-operation; the extension
is compiled with -ffp-contract=off so both backends agree bit-exactly.
"""

from libc.math cimport ceil, floor

BACKEND = "compiled"


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b):
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b):
    return a if a < b else b


def paint_disc(unsigned char[:, ::1] labels, double cx, double cy,
               double radius, unsigned char value):
    """Set labels[py, px] = value where the pixel center lies within radius of (cx, cy)."""
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t x_lo = _imax(0, <Py_ssize_t>floor(cx - radius) - 1)
    cdef Py_ssize_t x_hi = _imin(w - 1, <Py_ssize_t>ceil(cx + radius) + 1)
    cdef Py_ssize_t y_lo = _imax(0, <Py_ssize_t>floor(cy - radius) - 1)
    cdef Py_ssize_t y_hi = _imin(h - 1, <Py_ssize_t>ceil(cy + radius) + 1)
    cdef Py_ssize_t px, py
    cdef double dx, dy, dy2
    cdef double r2 = radius * radius
    if x_lo > x_hi or y_lo > y_hi:
        return
    for py in range(y_lo, y_hi + 1):
        dy = (py + 0.5) - cy
        dy2 = dy * dy
        for px in range(x_lo, x_hi + 1):
            dx = (px + 0.5) - cx
            if dx * dx + dy2 <= r2:
                labels[py, px] = value


def paint_capsule(unsigned char[:, ::1] labels, double ax, double ay,
                  double bx, double by, double half_width, unsigned char value):
    """Set labels[py, px] = value where the pixel center lies within half_width of segment ab."""
    cdef double abx = bx - ax
    cdef double aby = by - ay
    cdef double ab2 = abx * abx + aby * aby
    if ab2 == 0.0:
        paint_disc(labels, ax, ay, half_width, value)
        return
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef double x_min = ax if ax < bx else bx
    cdef double x_max = ax if ax > bx else bx
    cdef double y_min = ay if ay < by else by
    cdef double y_max = ay if ay > by else by
    cdef Py_ssize_t x_lo = _imax(0, <Py_ssize_t>floor(x_min - half_width) - 1)
    cdef Py_ssize_t x_hi = _imin(w - 1, <Py_ssize_t>ceil(x_max + half_width) + 1)
    cdef Py_ssize_t y_lo = _imax(0, <Py_ssize_t>floor(y_min - half_width) - 1)
    cdef Py_ssize_t y_hi = _imin(h - 1, <Py_ssize_t>ceil(y_max + half_width) + 1)
    cdef Py_ssize_t px, py
    cdef double apx, apy, t, ddx, ddy
    cdef double hw2 = half_width * half_width
    if x_lo > x_hi or y_lo > y_hi:
        return
    for py in range(y_lo, y_hi + 1):
        apy = (py + 0.5) - ay
        for px in range(x_lo, x_hi + 1):
            apx = (px + 0.5) - ax
            t = (apx * abx + apy * aby) / ab2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ddx = apx - t * abx
            ddy = apy - t * aby
            if ddx * ddx + ddy * ddy <= hw2:
                labels[py, px] = value


def fuse_crf(const unsigned char[:, ::1] parsing, const unsigned char[:, ::1] sil,
             unsigned char[:, ::1] out):
    """Per pixel: skeleton class where parsing is non-background, else 1 on silhouette, else 0."""
    cdef Py_ssize_t h = parsing.shape[0]
    cdef Py_ssize_t w = parsing.shape[1]
    cdef Py_ssize_t px, py
    cdef unsigned char p
    for py in range(h):
        for px in range(w):
            p = parsing[py, px]
            if p != 0:
                out[py, px] = p
            elif sil[py, px] != 0:
                out[py, px] = 1
            else:
                out[py, px] = 0


def fuse_dcf(const unsigned char[:, ::1] parsing, const unsigned char[:, ::1] sil,
             unsigned char[:, :, ::1] out):
    """Channel 0: neither input; channel 1: silhouette; channels 2..12: per-class indicators."""
    cdef Py_ssize_t n_ch = out.shape[0]
    cdef Py_ssize_t h = parsing.shape[0]
    cdef Py_ssize_t w = parsing.shape[1]
    cdef Py_ssize_t px, py, k
    cdef unsigned char p, s
    for py in range(h):
        for px in range(w):
            p = parsing[py, px]
            s = sil[py, px]
            out[0, py, px] = 1 if (p == 0 and s == 0) else 0
            out[1, py, px] = 1 if s != 0 else 0
            for k in range(2, n_ch):
                out[k, py, px] = 1 if p == k else 0


def resize_nearest(const unsigned char[:, ::1] src, unsigned char[:, ::1] dst):
    """Nearest-neighbor resample with pixel-center mapping."""
    cdef Py_ssize_t sh = src.shape[0]
    cdef Py_ssize_t sw = src.shape[1]
    cdef Py_ssize_t th = dst.shape[0]
    cdef Py_ssize_t tw = dst.shape[1]
    cdef Py_ssize_t ty, tx, sy, sx
    for ty in range(th):
        sy = <Py_ssize_t>(((ty + 0.5) * sh) / th)
        if sy > sh - 1:
            sy = sh - 1
        for tx in range(tw):
            sx = <Py_ssize_t>(((tx + 0.5) * sw) / tw)
            if sx > sw - 1:
                sx = sw - 1
            dst[ty, tx] = src[sy, sx]
