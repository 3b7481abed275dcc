"""Command-line front end.

Exit codes: 0 success, 1 data or I/O error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classification import confusion, metrics
from .dataset import (IMAGE_SUFFIXES, Manifest, add_unlabeled, ingest_patch_dataset,
                      ingest_pixel_dataset, pair_by_stem, parse_labeled_rate, split_manifest)
from .distance import distance_transform
from .errors import CrackEvalError, PairingError
from .mask import DEFAULT_THRESHOLD, Element, connected_components, dilate, load_mask, save_mask
from .perturb import KINDS, PerturbSpec, rows_to_csv, rows_to_json, sensitivity_sweep
from .segmentation import DEFAULT_TOLERANCE, DEFAULT_U, Extraction, HDParams, aggregate, evaluate, hd_score


def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {s}")
    return v


def _nonneg_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _positive_int(s):
    v = _nonneg_int(s)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _threshold(s):
    v = _nonneg_int(s)
    if not 1 <= v <= 255:
        raise argparse.ArgumentTypeError(f"threshold must be in [1, 255], got {s}")
    return v


def _fraction(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError(f"fraction must be in [0, 1), got {s}")
    return v


def _labeled_rate(s):
    try:
        return parse_labeled_rate(s)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _size(s):
    try:
        h, w = (int(x) for x in s.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like HxW, got {s!r}") from None
    if h <= 0 or w <= 0:
        raise argparse.ArgumentTypeError(f"size must be positive, got {s}")
    return h, w


def _mask_options(p):
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD,
                   help="luminance at or above which a pixel is foreground")
    p.add_argument("--invert", action="store_true", help="treat dark pixels as foreground")


def _hd_options(p):
    p.add_argument("--u", type=_positive_float, default=DEFAULT_U, help="saturation limit in pixels")
    p.add_argument("--extraction-pred", choices=[e.value for e in Extraction], default=Extraction.BOUNDARY.value)
    p.add_argument("--extraction-gt", choices=[e.value for e in Extraction], default=Extraction.FOREGROUND.value)


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _load(path, args):
    return load_mask(path, args.threshold, args.invert)


def _warm_up():
    # compiles (or loads the cached) distance kernel outside any timed region
    distance_transform(np.eye(2, dtype=bool))


# eval-seg

def _seg_pairs(pred, gt):
    pred, gt = Path(pred), Path(gt)
    if pred.is_file() and gt.is_file():
        return [(pred.stem, pred, gt)]
    if pred.is_dir() and gt.is_dir():
        pairs = pair_by_stem(pred, gt)
        if not pairs:
            raise PairingError(f"no images found in {pred}")
        return pairs
    for p in (pred, gt):
        if not p.exists():
            raise PairingError(f"{p} does not exist")
    raise PairingError("--pred and --gt must both be files or both be directories")


def _score_item(pred, gt, params, tolerance):
    t0 = time.perf_counter()
    rep = evaluate(pred, gt, params, tolerance)
    n_pred, _ = connected_components(pred)
    n_gt, _ = connected_components(gt)
    ms = (time.perf_counter() - t0) * 1000
    return rep, n_pred, n_gt, ms


def cmd_eval_seg(args):
    params = HDParams(args.u, args.extraction_pred, args.extraction_gt)
    pairs = _seg_pairs(args.pred, args.gt)
    masks = [(stem, p, g, _load(p, args), _load(g, args)) for stem, p, g in pairs]
    for stem, p, g, pm, gm in masks:
        if pm.shape != gm.shape:
            raise PairingError(f"{stem}: prediction {pm.shape} and ground truth {gm.shape} differ in shape")

    def run(item):
        return _score_item(item[3], item[4], params, args.tolerance)

    _warm_up()

    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as pool:
            results = list(pool.map(run, masks))
    else:
        results = [run(m) for m in masks]

    per_item, reports, times = [], [], []
    for (stem, p, g, _, _), (rep, n_pred, n_gt, ms) in zip(masks, results):
        per_item.append({"path": p.as_posix(), "gt": g.as_posix(), "stem": stem, **rep.to_dict(),
                         "pred_fragments": n_pred, "gt_fragments": n_gt})
        reports.append(rep)
        times.append(ms)
    agg = aggregate(reports)
    agg["pred_fragments"] = float(np.mean([r["pred_fragments"] for r in per_item]))
    agg["gt_fragments"] = float(np.mean([r["gt_fragments"] for r in per_item]))
    doc = {
        "tool_version": __version__,
        "command": "eval-seg",
        "params": {"pred": str(args.pred), "gt": str(args.gt), "u": params.u, "tolerance": args.tolerance,
                   "extraction_pred": params.extraction_pred.value, "extraction_gt": params.extraction_gt.value,
                   "threshold": args.threshold, "invert": args.invert},
        "per_item": per_item,
        "aggregate": agg,
        "timing": {"per_item_ms": times, "total_ms": float(sum(times))},
    }
    if args.out:
        _write_json(args.out, doc)
    print(f"items={agg['count']} hd_score={agg['hd_score']:.4f} pixel_precision={agg['pixel_precision']:.4f} "
          f"pixel_recall={agg['pixel_recall']:.4f} pixel_f1={agg['pixel_f1']:.4f} "
          f"u={params.u:g} tolerance={args.tolerance} compute_ms={sum(times):.1f}")
    return 0


# eval-cls

_PRED_VALUES = {"1": 1, "0": 0, "crack": 1, "uncrack": 0, "c": 1, "u": 0}


def _read_preds(path):
    preds = {}
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            if i == 0 and [c.strip().lower() for c in row[:2]] == ["path", "pred"]:
                continue
            if len(row) < 2:
                raise CrackEvalError(f"{path}:{i + 1}: expected 'path,pred'")
            value = _PRED_VALUES.get(row[1].strip().lower())
            if value is None:
                raise CrackEvalError(f"{path}:{i + 1}: prediction must be 0/1 or crack/uncrack, got {row[1]!r}")
            preds[Path(row[0].strip()).as_posix()] = value
    return preds


def cmd_eval_cls(args):
    manifest = Manifest.read(args.manifest)
    preds = _read_preds(args.preds)
    splits = set(args.splits.split(","))
    scored = [r for r in manifest.records if r.split in splits and r.label != "unknown"]
    if not scored:
        raise CrackEvalError(f"manifest has no labeled records in splits {sorted(splits)}")
    missing = [r.path for r in scored if Path(r.path).as_posix() not in preds]
    if missing:
        raise CrackEvalError(f"no prediction for {missing[0]}" + (f" (and {len(missing) - 1} more)" if len(missing) > 1 else ""))

    t0 = time.perf_counter()
    labels = [1 if r.label == "crack" else 0 for r in scored]
    ys = [preds[Path(r.path).as_posix()] for r in scored]
    cm = confusion(labels, ys)
    m = metrics(cm)
    by_split = {}
    for s in sorted(splits):
        idx = [i for i, r in enumerate(scored) if r.split == s]
        if idx:
            c = confusion([labels[i] for i in idx], [ys[i] for i in idx])
            by_split[s] = {"confusion": c.__dict__, **metrics(c).to_dict()}
    ms = (time.perf_counter() - t0) * 1000

    per_item = [{"path": r.path, "split": r.split, "label": y, "pred": p, "correct": y == p}
                for r, y, p in zip(scored, labels, ys)]
    doc = {
        "tool_version": __version__,
        "command": "eval-cls",
        "params": {"manifest": str(args.manifest), "preds": str(args.preds), "splits": sorted(splits)},
        "per_item": per_item,
        "aggregate": {"confusion": cm.__dict__, "count": cm.total, **m.to_dict(), "by_split": by_split},
        "timing": {"per_item_ms": [], "total_ms": ms},
    }
    if args.out:
        _write_json(args.out, doc)
    flags = f" flags={','.join(sorted(m.flags))}" if m.flags else ""
    print(f"n={cm.total} tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn} accuracy={m.accuracy:.4f} "
          f"precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}{flags}")
    return 0


# dilate-gt

def cmd_dilate_gt(args):
    src, dst = Path(args.inp), Path(args.out)
    if src.is_dir():
        items = [p for p in sorted(src.iterdir()) if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES]
        if not items:
            raise CrackEvalError(f"no images in {src}")
        dst.mkdir(parents=True, exist_ok=True)
        jobs = [(p, dst / (p.stem + ".png")) for p in items]
    else:
        if not src.is_file():
            raise CrackEvalError(f"{src} does not exist")
        if dst.is_dir():
            dst = dst / (src.stem + ".png")
        jobs = [(src, dst)]
    for a, b in jobs:
        save_mask(dilate(_load(a, args), args.element, args.iterations), b)
    print(f"wrote {len(jobs)} mask(s) element={args.element} iterations={args.iterations}")
    return 0


# split

def cmd_split(args):
    if args.root and (args.images or args.gts):
        raise _Usage("use either --root or --images/--gts, not both")
    if not args.root and not (args.images and args.gts):
        raise _Usage("need --root, or both --images and --gts")
    if args.val + args.test >= 1:
        raise _Usage("--val + --test must be < 1")
    m = ingest_patch_dataset(args.root) if args.root else ingest_pixel_dataset(args.images, args.gts, args.threshold)
    m = split_manifest(m, args.labeled_rate, args.val, args.test, args.seed)
    for extra in args.extra_unlabeled or []:
        m = add_unlabeled(m, extra)
    js, cs = m.write(args.out)
    c = m.counts
    s = c["split"]
    print(f"labeled={s['labeled']} unlabeled={s['unlabeled']} val={s['val']} test={s['test']} total={c['total']} "
          f"crack={c['label']['crack']} uncrack={c['label']['uncrack']} unknown={c['label']['unknown']}")
    print(f"wrote {js} and {cs}")
    return 0


# sweep

def _magnitude(tok: str):
    parts = tok.split(":")
    vals = [float(p) for p in parts]
    vals = [int(v) if v.is_integer() else v for v in vals]
    return tuple(vals) if len(vals) > 1 else vals[0]


def cmd_sweep(args):
    tokens = [t for m in args.magnitudes for t in m.split(",") if t.strip()]
    if not tokens:
        raise _Usage("--magnitudes needs at least one value")
    try:
        specs = [PerturbSpec(args.kind, _magnitude(t), args.seed) for t in tokens]
    except (ValueError, TypeError) as e:
        raise _Usage(f"bad magnitude for {args.kind}: {e}") from None
    gt = _load(args.gt, args)
    if not gt.any():
        raise CrackEvalError(f"{args.gt} has no foreground pixels")
    params = HDParams(args.u, args.extraction_pred, args.extraction_gt)
    rows = sensitivity_sweep(gt, specs, params)
    Path(args.out).write_text(rows_to_csv(rows))
    if args.json:
        Path(args.json).write_text(rows_to_json(rows))
    for r in rows:
        print(f"{r.spec.kind} {r.spec.magnitude_str():>8} hd_score={r.hd_score:.4f} h_crack={r.h_crack:.4f} "
              f"f1_t0={r.pixel_f1_at_t0:.4f} f1_t2={r.pixel_f1_at_t2:.4f}")
    return 0


# bench

def bench_pair(shape, density, seed):
    """Seeded random (pred, gt) pair of the given shape and foreground density."""
    rng = np.random.default_rng(seed)
    gt = rng.random(shape) < density
    pred = rng.random(shape) < density
    return pred, gt


def cmd_bench(args):
    pred, gt = bench_pair(args.size, args.density, args.seed)
    params = HDParams(args.u)
    _warm_up()
    timings = {"distance_transform": [], "hd_score": [], "evaluate": []}
    for i in range(args.iters):
        t0 = time.perf_counter()
        distance_transform(gt)
        t1 = time.perf_counter()
        hd_score(pred, gt, params)
        t2 = time.perf_counter()
        evaluate(pred, gt, params, args.tolerance)
        t3 = time.perf_counter()
        row = {"distance_transform": (t1 - t0) * 1000, "hd_score": (t2 - t1) * 1000, "evaluate": (t3 - t2) * 1000}
        for k, v in row.items():
            timings[k].append(v)
        print(f"iter {i + 1}: " + " ".join(f"{k}={v:.1f}ms" for k, v in row.items()))
    h, w = args.size
    for k, v in timings.items():
        print(f"{k} {h}x{w}: min={min(v):.1f}ms median={statistics.median(v):.1f}ms")
    return 0


class _Usage(Exception):
    pass


def build_parser():
    ap = argparse.ArgumentParser(prog="crackeval", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-seg", help="score predicted crack masks against ground truth")
    p.add_argument("--pred", required=True, help="predicted mask file or directory")
    p.add_argument("--gt", required=True, help="ground-truth mask file or directory")
    _hd_options(p)
    p.add_argument("--tolerance", type=_nonneg_int, default=DEFAULT_TOLERANCE, help="pixel match distance")
    _mask_options(p)
    p.add_argument("--jobs", type=_positive_int, default=1, help="pairs scored concurrently")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("eval-cls", help="score patch crack/uncrack predictions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preds", required=True, help="CSV of path,pred")
    p.add_argument("--splits", default="val,test", help="comma-separated splits to score")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_eval_cls)

    p = sub.add_parser("dilate-gt", help="thicken 1-pixel ground-truth curves")
    p.add_argument("--in", dest="inp", required=True, help="mask file or directory")
    p.add_argument("--iterations", type=_nonneg_int, default=3)
    p.add_argument("--element", choices=[e.value for e in Element], default=Element.CROSS4.value)
    p.add_argument("--out", required=True, help="output file or directory")
    _mask_options(p)
    p.set_defaults(func=cmd_dilate_gt)

    p = sub.add_parser("split", help="build a labeled/unlabeled/val/test manifest")
    p.add_argument("--root", help="class-folder dataset root (C*/U* folders)")
    p.add_argument("--images", help="image directory of a pixel-annotated dataset")
    p.add_argument("--gts", help="ground-truth mask directory paired by stem")
    p.add_argument("--labeled-rate", type=_labeled_rate, default=10, help="labeled/total as 1:k")
    p.add_argument("--val", type=_fraction, default=0.1)
    p.add_argument("--test", type=_fraction, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extra-unlabeled", nargs="+", action="extend", metavar="DIR")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True, help="manifest JSON path (CSV written alongside)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("sweep", help="score controlled perturbations of a ground-truth mask")
    p.add_argument("--gt", required=True)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--magnitudes", nargs="*", default=[],
                   help="values, comma or space separated; fp_blob takes count:radius:min_dist")
    _hd_options(p)
    p.add_argument("--seed", type=int, default=0)
    _mask_options(p)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--json", help="optional JSON copy of the rows")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="time the distance transform and scoring on random masks")
    p.add_argument("--size", type=_size, default=(2048, 4096), help="HxW")
    p.add_argument("--density", type=_fraction, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=_positive_int, default=5)
    p.add_argument("--u", type=_positive_float, default=DEFAULT_U)
    p.add_argument("--tolerance", type=_nonneg_int, default=DEFAULT_TOLERANCE)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as e:
        parser.error(str(e))
    except (CrackEvalError, OSError, ValueError) as e:
        print(f"crackeval {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
