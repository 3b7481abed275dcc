"""Controlled degradations of a ground-truth mask, and sweeps that score them.

Each perturbation mimics one failure mode of a crack detector:
``translate`` (localization error), ``dilate`` (over-thick output),
``erode`` (missed thin cracks), ``fp_blob`` (distant false positives) and
``drop_components`` (missed fragments, in the limit an all-black output).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distance import distance_transform
from .errors import PlacementError
from .mask import Element, as_mask, connected_components, dilate, erode, translate_mask
from .segmentation import HDParams, evaluate, pixel_prf

KINDS = ("translate", "dilate", "erode", "fp_blob", "drop_components")
SWEEP_COLUMNS = ("kind", "magnitude", "seed", "hd_score", "h_crack", "f1_t0", "f1_t2")


@dataclass(frozen=True)
class PerturbSpec:
    """One perturbation.

    ``magnitude`` depends on ``kind``: rows to shift down (or a ``(dy, dx)``
    pair) for translate, iterations for dilate/erode, ``(count, radius,
    min_dist)`` for fp_blob, and a fraction in [0, 1] for drop_components.
    """

    kind: str
    magnitude: object
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        mag = self.magnitude
        if self.kind == "translate":
            if isinstance(mag, (tuple, list)):
                if len(mag) != 2:
                    raise ValueError("translate offset must be (dy, dx)")
                object.__setattr__(self, "magnitude", (int(mag[0]), int(mag[1])))
            elif int(mag) < 0:
                raise ValueError("translate magnitude must be >= 0")
            else:
                object.__setattr__(self, "magnitude", int(mag))
        elif self.kind in ("dilate", "erode"):
            if int(mag) < 0:
                raise ValueError(f"{self.kind} iterations must be >= 0")
            object.__setattr__(self, "magnitude", int(mag))
        elif self.kind == "fp_blob":
            if len(mag) != 3 or min(mag) < 0:
                raise ValueError("fp_blob magnitude must be nonnegative (count, radius, min_dist)")
            object.__setattr__(self, "magnitude", (int(mag[0]), int(mag[1]), float(mag[2])))
        else:
            if not 0 <= float(mag) <= 1:
                raise ValueError("drop_components fraction must be in [0, 1]")
            object.__setattr__(self, "magnitude", float(mag))

    def magnitude_str(self) -> str:
        m = self.magnitude
        if isinstance(m, tuple):
            return ";".join(format_number(v) for v in m)
        return format_number(m)


def format_number(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def _disc(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(r, r, indexing="ij")
    inside = dy * dy + dx * dx <= radius * radius
    return np.stack([dy[inside], dx[inside]], axis=1)


def _fp_blobs(gt: np.ndarray, count: int, radius: int, min_dist: float,
              rng: np.random.Generator, max_tries: int) -> np.ndarray:
    h, w = gt.shape
    out = gt.copy()
    if count == 0:
        return out
    if h <= 2 * radius or w <= 2 * radius:
        raise PlacementError(f"disc of radius {radius} does not fit in a {h}x{w} image")
    dt = distance_transform(gt)
    disc = _disc(radius)
    for i in range(count):
        for _ in range(max_tries):
            cy = rng.integers(radius, h - radius)
            cx = rng.integers(radius, w - radius)
            rows, cols = disc[:, 0] + cy, disc[:, 1] + cx
            if dt[rows, cols].min() >= min_dist:
                out[rows, cols] = True
                break
        else:
            raise PlacementError(
                f"could not place blob {i + 1} of {count} at distance >= {min_dist} "
                f"from the ground truth after {max_tries} tries"
            )
    return out


def _drop_components(gt: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    count, labels = connected_components(gt)
    # round() guards against 0.3 * 10 == 3.0000000000000004
    n_drop = min(count, math.ceil(round(fraction * count, 9)))
    if n_drop == 0:
        return gt.copy()
    drop = rng.choice(np.arange(1, count + 1), size=n_drop, replace=False)
    return gt & ~np.isin(labels, drop)


def apply_perturbation(gt, spec: PerturbSpec, max_tries: int = 1000) -> np.ndarray:
    """Return a perturbed copy of ``gt``; identical (gt, spec) gives identical output."""
    m = as_mask(gt)
    rng = np.random.default_rng(spec.seed)
    mag = spec.magnitude
    if spec.kind == "translate":
        dy, dx = mag if isinstance(mag, tuple) else (mag, 0)
        return translate_mask(m, dy, dx)
    if spec.kind == "dilate":
        return dilate(m, Element.CROSS4, mag)
    if spec.kind == "erode":
        return erode(m, Element.CROSS4, mag)
    if spec.kind == "fp_blob":
        return _fp_blobs(m, *mag, rng=rng, max_tries=max_tries)
    return _drop_components(m, mag, rng)


@dataclass(frozen=True)
class SweepRow:
    spec: PerturbSpec
    hd_score: float
    h_crack: float
    pixel_f1_at_t0: float
    pixel_f1_at_t2: float

    def to_dict(self) -> dict:
        return {
            "kind": self.spec.kind,
            "magnitude": self.spec.magnitude_str(),
            "seed": self.spec.seed,
            "hd_score": self.hd_score,
            "h_crack": self.h_crack,
            "f1_t0": self.pixel_f1_at_t0,
            "f1_t2": self.pixel_f1_at_t2,
        }


def score_perturbed(gt, spec: PerturbSpec, params: HDParams | None = None) -> SweepRow:
    pred = apply_perturbation(gt, spec)
    rep = evaluate(pred, gt, params, tolerance=0)
    f1_t2 = pixel_prf(pred, gt, 2).f1
    return SweepRow(spec, rep.hd_score, rep.h_crack, rep.pixel_f1, f1_t2)


def sensitivity_sweep(gt, specs, params: HDParams | None = None, workers: int = 1) -> list[SweepRow]:
    """Score every perturbation of ``gt``; rows come back in ``specs`` order."""
    m = as_mask(gt)
    if not m.any():
        raise ValueError("sensitivity sweep needs a nonempty ground truth")
    params = params or HDParams()
    if workers <= 1:
        return [score_perturbed(m, s, params) for s in specs]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda s: score_perturbed(m, s, params), specs))


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.to_dict().items()})
    return buf.getvalue()


def rows_to_json(rows: list[SweepRow]) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2) + "\n"
