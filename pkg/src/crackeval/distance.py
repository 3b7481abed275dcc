"""Exact Euclidean distance transform.

Two separable passes: a per-column 1-D nearest-foreground scan, then a
per-row lower envelope of parabolas (Felzenszwalb & Huttenlocher).  All
squared distances are integers held in float64, so results are exact.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .mask import as_mask


@njit(cache=True, nogil=True)
def _edt(fg, take_sqrt):
    h, w = fg.shape
    out = np.empty((h, w), dtype=np.float64)
    far = h + w + 1
    col = np.empty((h, w), dtype=np.int32)

    # vertical distance to the nearest foreground pixel in the same column
    for c in range(w):
        col[0, c] = 0 if fg[0, c] else far
    for r in range(1, h):
        for c in range(w):
            if fg[r, c]:
                col[r, c] = 0
            else:
                p = col[r - 1, c] + 1
                col[r, c] = p if p < far else far
    for r in range(h - 2, -1, -1):
        for c in range(w):
            p = col[r + 1, c] + 1
            if p < col[r, c]:
                col[r, c] = p

    f = np.empty(w, dtype=np.float64)
    v = np.empty(w, dtype=np.int64)
    z = np.empty(w + 1, dtype=np.float64)
    for r in range(h):
        k = -1
        for q in range(w):
            g = col[r, q]
            if g >= far:
                continue
            fq = float(g) * g
            f[q] = fq
            s = 0.0
            while k >= 0:
                vk = v[k]
                s = ((fq + q * q) - (f[vk] + vk * vk)) / (2.0 * (q - vk))
                if s <= z[k]:
                    k -= 1
                else:
                    break
            if k < 0:
                k = 0
                v[0] = q
                z[0] = -np.inf
            else:
                k += 1
                v[k] = q
                z[k] = s
            z[k + 1] = np.inf
        if k < 0:
            for q in range(w):
                out[r, q] = np.inf
            continue
        j = 0
        for q in range(w):
            while z[j + 1] < q:
                j += 1
            d = q - v[j]
            sq = d * d + f[v[j]]
            out[r, q] = np.sqrt(sq) if take_sqrt else sq
    return out


def squared_distance_transform(mask) -> np.ndarray:
    """Squared distance from every pixel to the nearest foreground pixel.

    Values are exact integers stored as float64; ``inf`` everywhere if the
    mask is empty.
    """
    return _edt(np.ascontiguousarray(as_mask(mask)), False)


def distance_transform(mask) -> np.ndarray:
    """Euclidean distance from every pixel to the nearest foreground pixel.

    Zero exactly on foreground.  An empty mask gives ``inf`` everywhere.
    """
    return _edt(np.ascontiguousarray(as_mask(mask)), True)
