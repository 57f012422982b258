"""Raster primitives: image loading, Otsu binarization, projection histograms.

All images are row-major numpy arrays with the origin at the top-left
corner, so row indices grow downwards. "Foreground" always means ink.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DegenerateThresholdWarning, FormatError

__all__ = [
    "GrayImage",
    "BinaryImage",
    "Histogram",
    "VERTICAL",
    "HORIZONTAL",
    "LUMA_WEIGHTS",
    "load_grayscale",
    "otsu_binarize",
    "projection_histogram",
]

# Rec. 601 luma weights, fixed so grayscale conversion is reproducible
# across decoders.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

VERTICAL = "vertical"
HORIZONTAL = "horizontal"

_ACCEPTED_FORMATS = {"PNG", "JPEG"}


@dataclass
class GrayImage:
    """8-bit grayscale image.

    Attributes:
        pixels: uint8 array of shape (height, width); 0 is black ink,
            255 is white paper.
    """

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("GrayImage requires a non-empty 2-d array")
        if self.pixels.dtype != np.uint8:
            raise ValueError("GrayImage pixels must be uint8")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class BinaryImage:
    """Foreground mask of a page: True marks ink, False marks paper.

    ``threshold`` records the Otsu threshold that produced the mask when
    it came from :func:`otsu_binarize`.
    """

    foreground: np.ndarray
    threshold: int | None = None

    def __post_init__(self):
        self.foreground = np.asarray(self.foreground)
        if self.foreground.ndim != 2 or self.foreground.size == 0:
            raise ValueError("BinaryImage requires a non-empty 2-d array")
        if self.foreground.dtype != np.bool_:
            raise ValueError("BinaryImage foreground must be bool")

    @property
    def height(self) -> int:
        return self.foreground.shape[0]

    @property
    def width(self) -> int:
        return self.foreground.shape[1]


@dataclass
class Histogram:
    """Projection histogram of a binary image.

    axis="vertical" counts foreground per row (length = image height),
    axis="horizontal" counts foreground per column (length = width).
    """

    axis: str
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.axis not in (VERTICAL, HORIZONTAL):
            raise ValueError(f"unknown histogram axis {self.axis!r}")
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1:
            raise ValueError("Histogram counts must be 1-d")


def load_grayscale(path: str | Path) -> GrayImage:
    """Load a PNG or JPEG file and convert it to 8-bit grayscale.

    Color inputs are reduced with the fixed Rec. 601 weights
    (0.299, 0.587, 0.114) and rounded to the nearest integer, so the
    conversion is identical regardless of the source mode. Alpha, if
    present, is composited over white first.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in _ACCEPTED_FORMATS:
                raise FormatError(
                    f"{path.name}: unsupported format {im.format!r}, expected PNG or JPEG"
                )
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
                return GrayImage(arr.copy())
            if "A" in im.getbands():
                base = Image.new("RGBA", im.size, (255, 255, 255, 255))
                base.alpha_composite(im.convert("RGBA"))
                im = base
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path.name}: not a decodable image ({exc})") from exc
    except FileNotFoundError as exc:
        raise FormatError(f"{path}: no such file") from exc
    gray = rgb @ np.asarray(LUMA_WEIGHTS)
    return GrayImage(np.clip(np.rint(gray), 0, 255).astype(np.uint8))


def otsu_binarize(img: GrayImage) -> BinaryImage:
    """Threshold a grayscale image by maximizing between-class variance.

    The threshold t is chosen over all integer levels 0..255 to maximize
    w0*w1*(mu0 - mu1)^2 where class 0 holds pixels with intensity < t.
    Ties resolve to the lowest t. Pixels darker than t become foreground.

    A constant image has zero between-class variance everywhere; the
    result is an all-background mask and a DegenerateThresholdWarning.

    The scan is done in exact integer arithmetic. Between-class variance
    equals (s0*n1 - s1*n0)^2 / (n0*n1*total^2) with integer counts n and
    intensity sums s, so candidates compare exactly by cross-multiplied
    numerators; float rounding can never flip a near-tie.
    """
    hist = [int(c) for c in np.bincount(img.pixels.ravel(), minlength=256)]
    n_total = sum(hist)
    s_total = sum(v * c for v, c in enumerate(hist))
    best_t = None
    best_num, best_den = 0, 1
    n0 = 0
    s0 = 0
    for t in range(256):
        if t > 0:
            n0 += hist[t - 1]
            s0 += (t - 1) * hist[t - 1]
        n1 = n_total - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n1 - (s_total - s0) * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:  # strict: ties keep the lowest t
            best_t, best_num, best_den = t, num, den
    if best_t is None or best_num == 0:
        warnings.warn(
            "image is constant; Otsu threshold is degenerate",
            DegenerateThresholdWarning,
            stacklevel=2,
        )
        best_t = 0
    return BinaryImage(img.pixels < best_t, threshold=best_t)


def projection_histogram(img: BinaryImage, axis: str) -> Histogram:
    """Count foreground pixels per row (vertical) or per column (horizontal)."""
    if axis == VERTICAL:
        counts = img.foreground.sum(axis=1)
    elif axis == HORIZONTAL:
        counts = img.foreground.sum(axis=0)
    else:
        raise ValueError(f"unknown histogram axis {axis!r}")
    return Histogram(axis=axis, counts=counts.astype(np.int64))
