"""Binary masks: PNG I/O, point extraction, morphology and labeling.

A mask is a 2-D ``numpy`` bool array, ``True`` marking crack pixels.
Functions accept anything :func:`as_mask` can coerce and never modify
their input.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import MaskFormatError

DEFAULT_THRESHOLD = 128


class Element(str, Enum):
    """3x3 structuring elements."""

    CROSS4 = "cross4"
    SQUARE8 = "square8"


def as_mask(arr) -> np.ndarray:
    """Validate ``arr`` as a binary mask and return it as a bool array."""
    a = np.asarray(arr)
    if a.ndim != 2:
        raise MaskFormatError(f"mask must be 2-D, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise MaskFormatError(f"mask has a zero dimension: {a.shape}")
    if a.dtype == np.bool_:
        return a
    if not np.isin(a, (0, 1)).all():
        raise MaskFormatError("mask values must be 0 or 1")
    return a.astype(bool)


def _luminance(img: Image.Image) -> np.ndarray:
    mode = img.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        return (np.asarray(img, dtype=np.int64) >> 8).clip(0, 255).astype(np.uint8)
    if mode == "LA":
        img = img.getchannel("L")
    elif mode in ("RGBA", "P", "PA", "CMYK", "YCbCr", "RGBX"):
        img = img.convert("RGB")
    elif mode == "1":
        img = img.convert("L")
    arr = np.asarray(img)
    if arr.ndim == 3:
        # integer channel mean, not perceptual luma
        arr = (arr[..., :3].astype(np.uint16).sum(axis=2) // 3).astype(np.uint8)
    return arr


def load_mask(path, threshold: int = DEFAULT_THRESHOLD, invert: bool = False) -> np.ndarray:
    """Read a PNG and binarize it: foreground iff luminance >= threshold.

    With ``invert`` the rule is applied to ``255 - luminance`` so dark cracks
    on light pavement come out as foreground.
    """
    if not 1 <= threshold <= 255:
        raise ValueError(f"threshold must be in [1, 255], got {threshold}")
    with Image.open(path) as img:
        img.load()
        if img.width == 0 or img.height == 0:
            raise MaskFormatError(f"{path}: image has a zero dimension")
        lum = _luminance(img)
    if invert:
        lum = 255 - lum
    return lum >= threshold


def save_mask(mask, path) -> None:
    """Write ``mask`` as 8-bit grayscale PNG (foreground 255)."""
    m = as_mask(mask)
    Image.fromarray(m.astype(np.uint8) * 255).save(Path(path), format="PNG")


@dataclass(frozen=True)
class PointSet:
    """Distinct integer pixel coordinates stored as an ``(n, 2)`` array of (row, col).

    Rows of ``coords`` are unique and lexicographically sorted.  ``shape``,
    when set, is the (height, width) of the image the points came from.
    """

    coords: np.ndarray
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.int64).reshape(-1, 2)
        c = np.unique(c, axis=0) if len(c) else c
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if self.shape is not None:
            h, w = (int(s) for s in self.shape)
            object.__setattr__(self, "shape", (h, w))
            if len(c) and (c.min() < 0 or c[:, 0].max() >= h or c[:, 1].max() >= w):
                raise ValueError(f"points fall outside bounds {self.shape}")

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, int]], shape=None) -> "PointSet":
        return cls(np.array(list(points), dtype=np.int64).reshape(-1, 2), shape)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return (tuple(p) for p in self.coords.tolist())

    def __bool__(self) -> bool:
        return len(self.coords) > 0

    def to_set(self) -> set[tuple[int, int]]:
        return set(self)

    def translated(self, dy: int, dx: int) -> "PointSet":
        return PointSet(self.coords + np.array([dy, dx]))


def foreground_points(mask) -> PointSet:
    m = as_mask(mask)
    return PointSet(np.argwhere(m), m.shape)


def boundary_mask(mask) -> np.ndarray:
    """Foreground pixels with a 4-neighbor that is background or off-image."""
    m = as_mask(mask)
    return m & ~erode(m, Element.CROSS4, 1)


def boundary_points(mask) -> PointSet:
    m = as_mask(mask)
    return PointSet(np.argwhere(boundary_mask(m)), m.shape)


def _grow(m: np.ndarray, element: Element) -> np.ndarray:
    out = m.copy()
    if element is Element.CROSS4:
        out[1:, :] |= m[:-1, :]
        out[:-1, :] |= m[1:, :]
        out[:, 1:] |= m[:, :-1]
        out[:, :-1] |= m[:, 1:]
    else:
        out[1:, :] |= m[:-1, :]
        out[:-1, :] |= m[1:, :]
        rows = out.copy()
        out[:, 1:] |= rows[:, :-1]
        out[:, :-1] |= rows[:, 1:]
    return out


def _shrink_padded(m: np.ndarray, element: Element) -> np.ndarray:
    # off-image counts as background
    p = np.pad(m, 1, constant_values=False)
    return ~_grow(~p, element)[1:-1, 1:-1]


def dilate(mask, element: Element | str = Element.CROSS4, iterations: int = 1) -> np.ndarray:
    """Binary dilation repeated ``iterations`` times, clipped to the image."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    element = Element(element)
    out = as_mask(mask).copy()
    for _ in range(iterations):
        out = _grow(out, element)
    return out


def erode(mask, element: Element | str = Element.CROSS4, iterations: int = 1) -> np.ndarray:
    """Binary erosion; pixels outside the image count as background."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    element = Element(element)
    out = as_mask(mask).copy()
    for _ in range(iterations):
        if not out.any():
            break
        out = _shrink_padded(out, element)
    return out


def translate_mask(mask, dy: int, dx: int) -> np.ndarray:
    """Shift foreground by (dy, dx); pixels leaving the frame are dropped."""
    m = as_mask(mask)
    h, w = m.shape
    out = np.zeros_like(m)
    if abs(dy) >= h or abs(dx) >= w:
        return out
    src = m[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
    out[max(0, dy):max(0, dy) + src.shape[0], max(0, dx):max(0, dx) + src.shape[1]] = src
    return out


_EIGHT = np.ones((3, 3), dtype=bool)


def connected_components(mask) -> tuple[int, np.ndarray]:
    """8-connected labeling: returns (count, labels) with background 0."""
    labels, count = ndimage.label(as_mask(mask), structure=_EIGHT)
    return int(count), labels
