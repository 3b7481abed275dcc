"""Dataset ingestion, patch cropping and labeled/unlabeled split manifests."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__
from .classification import class_weights
from .errors import IngestionError, PairingError
from .mask import DEFAULT_THRESHOLD, load_mask

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
LABELS = ("crack", "uncrack", "unknown")
SPLITS = ("labeled", "unlabeled", "val", "test")
CSV_COLUMNS = ("path", "label", "split", "pair_gt")
SHUFFLE_RNG = "numpy.random.Generator(PCG64(seed)).permutation over path-sorted known-label records"


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: str
    split: str = "labeled"
    pair_gt: str | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"bad label {self.label!r}")
        if self.split not in SPLITS:
            raise ValueError(f"bad split {self.split!r}")

    def to_dict(self) -> dict:
        d = {"path": self.path, "label": self.label, "split": self.split}
        if self.pair_gt is not None:
            d["pair_gt"] = self.pair_gt
        return d


@dataclass
class Manifest:
    records: list[ManifestRecord]
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.path)

    @property
    def counts(self) -> dict:
        labels = Counter(r.label for r in self.records)
        splits = Counter(r.split for r in self.records)
        return {
            "label": {k: labels.get(k, 0) for k in LABELS},
            "split": {k: splits.get(k, 0) for k in SPLITS},
            "total": len(self.records),
        }

    def header(self) -> dict:
        h = {
            "tool_version": __version__,
            "seed": self.seed,
            "params": self.params,
            "counts": self.counts,
        }
        n_pos, n_neg = h["counts"]["label"]["crack"], h["counts"]["label"]["uncrack"]
        if n_pos and n_neg:
            w = class_weights(n_pos, n_neg)
            h["class_weights"] = {"crack": w.w_pos, "uncrack": w.w_neg}
        return h

    def to_json(self) -> str:
        doc = {"header": self.header(), "records": [r.to_dict() for r in self.records]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.path, r.label, r.split, r.pair_gt or ""])
        return buf.getvalue()

    def write(self, json_path) -> tuple[Path, Path]:
        """Write ``<name>.json`` and the sibling ``<name>.csv``."""
        json_path = Path(json_path)
        csv_path = json_path.with_suffix(".csv")
        json_path.write_text(self.to_json())
        csv_path.write_text(self.to_csv())
        return json_path, csv_path

    @classmethod
    def from_json(cls, text: str) -> "Manifest":
        doc = json.loads(text)
        head = doc.get("header", {})
        recs = [ManifestRecord(r["path"], r["label"], r["split"], r.get("pair_gt")) for r in doc["records"]]
        return cls(recs, head.get("seed"), head.get("params", {}))

    @classmethod
    def read(cls, path) -> "Manifest":
        return cls.from_json(Path(path).read_text())


def _is_image(p: Path) -> bool:
    return p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES


def _class_of(rel: Path) -> str | None:
    # nearest enclosing folder named C* or U*
    for part in reversed(rel.parts[:-1]):
        c = part[:1].lower()
        if c == "c":
            return "crack"
        if c == "u":
            return "uncrack"
    return None


def ingest_patch_dataset(root) -> Manifest:
    """Scan a class-folder tree (``C*`` cracked, ``U*`` uncracked, case-insensitive).

    Each image takes its label from the nearest enclosing folder whose name
    starts with C or U, so both ``root/C/x.png`` and ``root/D/CD/x.jpg`` work.
    """
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"{root} is not a directory")
    records = []
    seen_dirs = set()
    for p in sorted(root.rglob("*")):
        if not _is_image(p):
            continue
        rel = p.relative_to(root)
        seen_dirs.add(rel.parts[0] if len(rel.parts) > 1 else ".")
        label = _class_of(rel)
        if label is not None:
            records.append(ManifestRecord(p.as_posix(), label))
    if not records:
        subdirs = sorted(d.name for d in root.iterdir() if d.is_dir())
        raise IngestionError(
            f"no images under C*/U* folders in {root}; "
            f"subdirectories: {subdirs or 'none'}; folders holding images: {sorted(seen_dirs) or 'none'}"
        )
    return Manifest(records, params={"source": root.as_posix(), "layout": "class-folders"})


def _by_stem(d: Path) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for p in sorted(d.iterdir()):
        if not _is_image(p):
            continue
        if p.stem in out:
            raise PairingError(f"ambiguous stem {p.stem!r} in {d}: {out[p.stem].name}, {p.name}")
        out[p.stem] = p
    return out


def pair_by_stem(a_dir, b_dir) -> list[tuple[str, Path, Path]]:
    """Match image files in two directories by extension-stripped name."""
    a_dir, b_dir = Path(a_dir), Path(b_dir)
    for d in (a_dir, b_dir):
        if not d.is_dir():
            raise IngestionError(f"{d} is not a directory")
    a, b = _by_stem(a_dir), _by_stem(b_dir)
    only_a, only_b = sorted(a.keys() - b.keys()), sorted(b.keys() - a.keys())
    if only_a or only_b:
        parts = []
        if only_a:
            parts.append(f"stems only in {a_dir}: {', '.join(only_a)}")
        if only_b:
            parts.append(f"stems only in {b_dir}: {', '.join(only_b)}")
        raise PairingError("; ".join(parts))
    return [(s, a[s], b[s]) for s in sorted(a)]


def ingest_pixel_dataset(images, gts, threshold: int = DEFAULT_THRESHOLD) -> Manifest:
    """Pair images with same-stem GT masks; label is crack iff the mask has foreground."""
    records = []
    for _, img, gt in pair_by_stem(images, gts):
        label = "crack" if load_mask(gt, threshold).any() else "uncrack"
        records.append(ManifestRecord(img.as_posix(), label, pair_gt=gt.as_posix()))
    if not records:
        raise IngestionError(f"no images found in {images}")
    return Manifest(records, params={"source": Path(images).as_posix(), "gts": Path(gts).as_posix(),
                                     "layout": "image-gt-pairs", "threshold": threshold})


class Patch(NamedTuple):
    row: int
    col: int
    data: np.ndarray


def crop_patches(image, size: int, stride: int | None = None) -> list[Patch]:
    """Top-left anchored sliding windows; windows that would overhang are dropped."""
    stride = size if stride is None else stride
    if size <= 0 or stride <= 0:
        raise ValueError("size and stride must be positive")
    img = np.asarray(image)
    h, w = img.shape[:2]
    if h < size or w < size:
        raise ValueError(f"image {h}x{w} is smaller than patch size {size}")
    return [
        Patch(r, c, img[r:r + size, c:c + size])
        for r in range(0, h - size + 1, stride)
        for c in range(0, w - size + 1, stride)
    ]


def parse_labeled_rate(rate) -> int:
    """``"1:k"`` (or plain ``k``) -> k, with k >= 1."""
    if isinstance(rate, int):
        k = rate
    else:
        s = str(rate).strip()
        num, sep, den = s.partition(":")
        if not sep:
            num, den = "1", s
        try:
            if int(num) != 1:
                raise ValueError
            k = int(den)
        except ValueError:
            raise ValueError(f"labeled rate must look like 1:k, got {rate!r}") from None
    if k < 1:
        raise ValueError(f"labeled rate denominator must be >= 1, got {rate!r}")
    return k


def _quotas(class_counts: dict[str, int], n: int, available: dict[str, int]) -> dict[str, int]:
    """Split ``n`` across classes in proportion to ``class_counts`` (largest remainder).

    Classes short of records in ``available`` pass their excess on to the others.
    """
    total = sum(class_counts.values())
    names = sorted(class_counts)
    quota = {c: n * class_counts[c] // total for c in names}
    rest = n - sum(quota.values())
    by_rem = sorted(names, key=lambda c: (-(n * class_counts[c] % total), c))
    for c in by_rem[:rest]:
        quota[c] += 1
    spill = 0
    for c in names:
        if quota[c] > available.get(c, 0):
            spill += quota[c] - available.get(c, 0)
            quota[c] = available.get(c, 0)
    for c in by_rem:
        take = min(spill, available.get(c, 0) - quota[c])
        quota[c] += take
        spill -= take
    return quota


def split_manifest(m: Manifest, labeled_rate="1:10", val_frac: float = 0.1,
                   test_frac: float = 0.1, seed: int = 0) -> Manifest:
    """Carve val/test, then keep ``floor(n_train / k)`` training records labeled.

    Records are path-sorted and shuffled with a seeded PCG64 permutation.
    The labeled subset is stratified by class against the overall class
    proportions.  Records whose label is ``unknown`` never enter val, test
    or the labeled subset.
    """
    k = parse_labeled_rate(labeled_rate)
    if not (0 <= val_frac < 1 and 0 <= test_frac < 1 and val_frac + test_frac < 1):
        raise ValueError(f"need 0 <= val + test < 1, got val={val_frac} test={test_frac}")

    ordered = sorted(m.records, key=lambda r: r.path)
    known = [r for r in ordered if r.label != "unknown"]
    unknown = [replace(r, split="unlabeled") for r in ordered if r.label == "unknown"]

    rng = np.random.default_rng(seed)
    shuffled = [known[i] for i in rng.permutation(len(known))]
    n = len(shuffled)
    n_val, n_test = math.floor(n * val_frac), math.floor(n * test_frac)
    val, test, train = shuffled[:n_val], shuffled[n_val:n_val + n_test], shuffled[n_val + n_test:]

    n_lab = len(train) // k
    overall = Counter(r.label for r in known)
    quota = _quotas(dict(overall), n_lab, Counter(r.label for r in train)) if n_lab else {}
    taken = Counter()
    out = [replace(r, split="val") for r in val] + [replace(r, split="test") for r in test]
    for r in train:
        if taken[r.label] < quota.get(r.label, 0):
            taken[r.label] += 1
            out.append(replace(r, split="labeled"))
        else:
            out.append(replace(r, split="unlabeled"))

    params = dict(m.params)
    params.update({
        "labeled_rate": f"1:{k}",
        "val_frac": val_frac,
        "test_frac": test_frac,
        "stratified": True,
        "shuffle": SHUFFLE_RNG,
    })
    return Manifest(out + unknown, seed=seed, params=params)


def add_unlabeled(m: Manifest, extra_root) -> Manifest:
    """Append every image under ``extra_root`` as an unknown-label, unlabeled record."""
    extra_root = Path(extra_root)
    if not extra_root.is_dir():
        raise IngestionError(f"{extra_root} is not a directory")
    extra = [ManifestRecord(p.as_posix(), "unknown", "unlabeled")
             for p in sorted(extra_root.rglob("*")) if _is_image(p)]
    if not extra:
        raise IngestionError(f"no images found under {extra_root}")
    params = dict(m.params)
    params["extra_unlabeled"] = list(params.get("extra_unlabeled", [])) + [extra_root.as_posix()]
    return Manifest(list(m.records) + extra, seed=m.seed, params=params)
