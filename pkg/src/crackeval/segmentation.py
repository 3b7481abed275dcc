"""Hausdorff-family scores for crack segmentation.

The score compares a predicted point set P against a ground-truth set Q::

    h(P, Q)          = max_p min_q |p - q|
    H(P, Q)          = max(h(P, Q), h(Q, P))
    h_penalty(P, Q)  = mean_p min(min_q |p - q|, u)
    H_crack(P, Q)    = max(h_penalty(P, Q), h_penalty(Q, P))
    hd_score         = 100 * (1 - H_crack / u)

Nearest-neighbor distances for whole sets are read off an exact distance
transform instead of pairwise loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .distance import distance_transform
from .errors import EmptyPointSetError, ShapeMismatchError
from .mask import PointSet, as_mask, boundary_mask

DEFAULT_U = 50.0
DEFAULT_TOLERANCE = 2

# rasterizing point sets beyond this many pixels falls back to a k-d tree
_RASTER_LIMIT = 1 << 24


class Extraction(str, Enum):
    BOUNDARY = "boundary"
    FOREGROUND = "foreground"


@dataclass(frozen=True)
class HDParams:
    u: float = DEFAULT_U
    extraction_pred: Extraction = Extraction.BOUNDARY
    extraction_gt: Extraction = Extraction.FOREGROUND

    def __post_init__(self):
        if not self.u > 0 or not np.isfinite(self.u):
            raise ValueError(f"u must be a positive finite number, got {self.u}")
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "extraction_pred", Extraction(self.extraction_pred))
        object.__setattr__(self, "extraction_gt", Extraction(self.extraction_gt))


@dataclass
class PixelScores:
    precision: float
    recall: float
    f1: float
    flags: set[str] = field(default_factory=set)


@dataclass
class SegReport:
    """Per-image segmentation scores.

    ``pixel_*`` fields are ``None`` when only the Hausdorff part was computed.
    ``flags`` may hold ``all_black_prediction``, ``empty_gt`` or ``empty_both``,
    plus the zero-division markers from :func:`pixel_prf`.
    """

    hd_score: float
    h_penalty_forward: float
    h_penalty_backward: float
    h_crack: float
    u: float
    pixel_precision: float | None = None
    pixel_recall: float | None = None
    pixel_f1: float | None = None
    tolerance: float | None = None
    flags: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = sorted(self.flags)
        return d


def _points(x) -> np.ndarray:
    if isinstance(x, PointSet):
        return x.coords
    return PointSet(np.asarray(x, dtype=np.int64).reshape(-1, 2)).coords


def nearest_distances(P, Q) -> np.ndarray:
    """Distance from each point of P to its nearest point of Q (``inf`` if Q is empty)."""
    p, q = _points(P), _points(Q)
    if len(q) == 0:
        return np.full(len(p), np.inf)
    if len(p) == 0:
        return np.empty(0)
    both = np.concatenate([p, q])
    lo = both.min(axis=0)
    extent = both.max(axis=0) - lo + 1
    if int(extent[0]) * int(extent[1]) > _RASTER_LIMIT:
        return cKDTree(q).query(p)[0]
    grid = np.zeros(tuple(extent), dtype=bool)
    qq = q - lo
    grid[qq[:, 0], qq[:, 1]] = True
    dt = distance_transform(grid)
    pp = p - lo
    return dt[pp[:, 0], pp[:, 1]]


def _require(P, Q):
    if len(_points(P)) == 0 or len(_points(Q)) == 0:
        raise EmptyPointSetError("Hausdorff distance needs two nonempty point sets")


def directed_hausdorff(P, Q) -> float:
    _require(P, Q)
    return float(nearest_distances(P, Q).max())


def hausdorff(P, Q) -> float:
    return max(directed_hausdorff(P, Q), directed_hausdorff(Q, P))


def _check_u(u):
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")


def _saturated_mean(d: np.ndarray, u: float) -> float:
    clipped = np.minimum(d, u)
    # the mean of n equal floats can round one ulp above them
    return min(float(clipped.mean()), float(clipped.max()))


def penalized_directed(P, Q, u: float) -> float:
    """Mean of nearest-neighbor distances from P to Q, each clipped at ``u``.

    An empty Q saturates every term, giving exactly ``u``.
    """
    _check_u(u)
    if len(_points(P)) == 0:
        raise EmptyPointSetError("penalized distance needs a nonempty P")
    return _saturated_mean(nearest_distances(P, Q), u)


def h_crack(P, Q, u: float) -> float:
    _require(P, Q)
    return max(penalized_directed(P, Q, u), penalized_directed(Q, P, u))


def score_from_h(h: float, u: float) -> float:
    return float(min(100.0, max(0.0, 100.0 * (1.0 - h / u))))


def _extract(m: np.ndarray, how: Extraction) -> np.ndarray:
    return boundary_mask(m) if how is Extraction.BOUNDARY else m


def _check_pair(pred, gt):
    p, g = as_mask(pred), as_mask(gt)
    if p.shape != g.shape:
        raise ShapeMismatchError(f"prediction {p.shape} and ground truth {g.shape} differ in shape")
    return p, g


class _PairFields:
    """Distance fields shared by the Hausdorff and tolerance computations.

    Only two transforms are run per pair: one per extracted set.  Distance
    to a full foreground is recovered from distance to its 4-boundary,
    since the nearest foreground pixel of any background pixel is always a
    boundary pixel.
    """

    def __init__(self, pred, gt, params: HDParams):
        self.pred, self.gt, self.params = pred, gt, params
        self.p_set = _extract(pred, params.extraction_pred)
        self.q_set = _extract(gt, params.extraction_gt)
        self._dt_p = self._dt_q = None

    @property
    def dt_p(self):
        if self._dt_p is None:
            self._dt_p = distance_transform(self.p_set)
        return self._dt_p

    @property
    def dt_q(self):
        if self._dt_q is None:
            self._dt_q = distance_transform(self.q_set)
        return self._dt_q

    def pred_fg_distance_at(self, where: np.ndarray) -> np.ndarray:
        d = self.dt_p[where]
        if self.params.extraction_pred is Extraction.BOUNDARY:
            d[self.pred[where]] = 0.0
        return d

    def gt_fg_distance_at(self, where: np.ndarray) -> np.ndarray:
        d = self.dt_q[where]
        if self.params.extraction_gt is Extraction.BOUNDARY:
            d[self.gt[where]] = 0.0
        return d


def _hd(f: _PairFields) -> SegReport:
    u = f.params.u
    pred_empty, gt_empty = not f.pred.any(), not f.gt.any()
    if pred_empty and gt_empty:
        return SegReport(100.0, 0.0, 0.0, 0.0, u, flags={"empty_both"})
    if pred_empty:
        return SegReport(0.0, 0.0, u, u, u, flags={"all_black_prediction"})
    if gt_empty:
        return SegReport(0.0, u, 0.0, u, u, flags={"empty_gt"})
    fwd = _saturated_mean(f.dt_q[f.p_set], u)
    bwd = _saturated_mean(f.dt_p[f.q_set], u)
    h = max(fwd, bwd)
    return SegReport(score_from_h(h, u), fwd, bwd, h, u)


def _prf(f: _PairFields, tolerance: float) -> PixelScores:
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    n_pred, n_gt = int(f.pred.sum()), int(f.gt.sum())
    flags = set()
    if n_pred == 0 and n_gt == 0:
        return PixelScores(1.0, 1.0, 1.0, {"empty_both"})
    if n_pred == 0:
        precision = 0.0
        flags.add("precision_zero_division")
    else:
        precision = int((f.gt_fg_distance_at(f.pred) <= tolerance).sum()) / n_pred
    if n_gt == 0:
        recall = 0.0
        flags.add("recall_zero_division")
    else:
        recall = int((f.pred_fg_distance_at(f.gt) <= tolerance).sum()) / n_gt
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PixelScores(precision, recall, f1, flags)


def hd_score(pred, gt, params: HDParams | None = None) -> SegReport:
    """Hausdorff part of the report for one prediction/ground-truth pair.

    Both empty scores 100 (``empty_both``); exactly one empty scores 0
    (``all_black_prediction`` or ``empty_gt``) with the nonempty side's
    penalty saturated at ``u`` and the empty side's reported as 0.
    """
    p, g = _check_pair(pred, gt)
    return _hd(_PairFields(p, g, params or HDParams()))


def pixel_prf(pred, gt, tolerance: float = 0) -> PixelScores:
    """Tolerance-matched pixel precision, recall and F1.

    A predicted pixel counts as correct when some GT pixel lies within
    ``tolerance`` (Euclidean), and symmetrically for recall.
    """
    p, g = _check_pair(pred, gt)
    return _prf(_PairFields(p, g, HDParams(extraction_pred="boundary", extraction_gt="boundary")), tolerance)


def evaluate(pred, gt, params: HDParams | None = None, tolerance: float = DEFAULT_TOLERANCE) -> SegReport:
    """Full report: Hausdorff scores plus tolerance pixel metrics, sharing distance fields."""
    p, g = _check_pair(pred, gt)
    f = _PairFields(p, g, params or HDParams())
    rep = _hd(f)
    prf = _prf(f, tolerance)
    rep.pixel_precision, rep.pixel_recall, rep.pixel_f1 = prf.precision, prf.recall, prf.f1
    rep.tolerance = tolerance
    rep.flags |= prf.flags - {"empty_both"}
    return rep


def aggregate(reports: list[SegReport]) -> dict:
    """Unweighted mean of per-image numeric fields."""
    keys = ("hd_score", "h_penalty_forward", "h_penalty_backward", "h_crack",
            "pixel_precision", "pixel_recall", "pixel_f1")
    out = {}
    for k in keys:
        vals = [getattr(r, k) for r in reports if getattr(r, k) is not None]
        out[k] = float(np.mean(vals)) if vals else None
    out["count"] = len(reports)
    return out
