"""Brute-force reference implementations.

Nothing here touches the distance transform or the package's morphology;
they exist to check those fast paths.
"""
import math
from collections import Counter

import numpy as np


def pairwise_nearest(P, Q):
    """min_q |p - q| for every p, by full pairwise distance matrix."""
    p = np.asarray(P, dtype=np.float64).reshape(-1, 2)
    q = np.asarray(Q, dtype=np.float64).reshape(-1, 2)
    if len(q) == 0:
        return np.full(len(p), np.inf)
    d = np.sqrt(((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2))
    return d.min(axis=1)


def directed(P, Q):
    return float(pairwise_nearest(P, Q).max())


def hausdorff(P, Q):
    return max(directed(P, Q), directed(Q, P))


def penalized(P, Q, u):
    return float(np.minimum(pairwise_nearest(P, Q), u).sum() / len(P))


def h_crack(P, Q, u):
    return max(penalized(P, Q, u), penalized(Q, P, u))


def distance_field(mask):
    m = np.asarray(mask, dtype=bool)
    fg = np.argwhere(m)
    grid = np.argwhere(np.ones_like(m))
    return pairwise_nearest(grid, fg).reshape(m.shape)


def dilate_set(points, offsets, shape, iterations):
    """Set-union dilation, one iteration at a time, clipped to ``shape``."""
    h, w = shape
    cur = set(points)
    for _ in range(iterations):
        cur = {(r + dr, c + dc) for r, c in cur for dr, dc in offsets
               if 0 <= r + dr < h and 0 <= c + dc < w}
    return cur


CROSS4 = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
SQUARE8 = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)]


def diamond(center, radius, shape):
    r0, c0 = center
    h, w = shape
    return {(r, c) for r in range(h) for c in range(w) if abs(r - r0) + abs(c - c0) <= radius}


def boundary_set(mask):
    m = np.asarray(mask, dtype=bool)
    h, w = m.shape
    out = set()
    for r, c in zip(*np.nonzero(m)):
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if not (0 <= rr < h and 0 <= cc < w) or not m[rr, cc]:
                out.add((int(r), int(c)))
                break
    return out


def tally(labels, preds):
    c = Counter(zip(labels, preds))
    return {"tp": c[(1, 1)], "fp": c[(0, 1)], "tn": c[(0, 0)], "fn": c[(1, 0)]}


def tolerance_prf(pred, gt, tol):
    p, g = np.argwhere(pred), np.argwhere(gt)
    if len(p) == 0 and len(g) == 0:
        return 1.0, 1.0, 1.0
    prec = float((pairwise_nearest(p, g) <= tol).mean()) if len(p) and len(g) else 0.0
    rec = float((pairwise_nearest(g, p) <= tol).mean()) if len(p) and len(g) else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return prec, rec, f1


def hd_score(h, u):
    return 100.0 * (1.0 - h / u)


def isclose(a, b, tol):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)
