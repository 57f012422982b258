"""Trace isolation and waveform extraction inside a lead crop.

The tracker walks the crop column by column, keeping only foreground
pixels near the rows the trace occupied in the previous column. That
separates the connected trace from grid residue and speckle without any
connected-component machinery, and it tolerates gaps (scanner dropouts)
by carrying the last band forward.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import TraceNotFoundError

__all__ = [
    "TraceParams",
    "TraceMask",
    "RawTrace",
    "choose_start_column",
    "remove_noise",
    "remove_isolated_pixels",
    "despeckle",
    "extract_waveform",
]


@dataclass(frozen=True)
class TraceParams:
    """Band tracking parameters.

    band_n: half-width N of the vertical acceptance window in pixels.
    start_col: seed column n, or None to pick one automatically.
    """

    band_n: int = 7
    start_col: int | None = None

    def __post_init__(self):
        if self.band_n < 1:
            raise ValueError("band_n must be >= 1")


@dataclass
class TraceMask:
    """Foreground mask holding only the tracked trace of one lead."""

    foreground: np.ndarray
    baseline_row: int

    def __post_init__(self):
        self.foreground = np.asarray(self.foreground)
        if self.foreground.ndim != 2 or self.foreground.dtype != np.bool_:
            raise ValueError("TraceMask foreground must be a 2-d bool array")
        if not (0 <= self.baseline_row < self.foreground.shape[0]):
            raise ValueError("baseline_row outside mask")


@dataclass
class RawTrace:
    """Per-column trace position in pixel units.

    values[j] = baseline_row - mean(foreground rows in column j), so
    upward deflections are positive. filled[j] marks columns that had no
    foreground and were copied from a neighbor.
    """

    values: np.ndarray
    filled: np.ndarray
    baseline_row: int


def choose_start_column(crop: np.ndarray, baseline_row: int, band_n: int) -> int:
    """Pick the seed column: nearest to the crop center whose on-band count
    (foreground within [baseline - N, baseline + N]) is maximal.

    Ties between equally good, equally near columns go to the lower index.
    Raises TraceNotFoundError when no column has on-band foreground.
    """
    h, w = crop.shape
    r0 = max(0, baseline_row - band_n)
    r1 = min(h, baseline_row + band_n + 1)
    counts = crop[r0:r1].sum(axis=0)
    if not counts.any():
        raise TraceNotFoundError("no foreground near the isoelectric row")
    best = counts.max()
    candidates = np.flatnonzero(counts == best)
    center = (w - 1) / 2
    dist = np.abs(candidates - center)
    nearest = candidates[dist == dist.min()]
    return int(nearest.min())


def remove_noise(crop: np.ndarray, baseline_row: int, params: TraceParams) -> TraceMask:
    """Track the trace band across the crop and drop everything else.

    Seeds at column n with the foreground pixels in rows
    [baseline - N, baseline + N]; marches right then left, each pass
    restarting from the seed band. In each new column, pixels within
    [c_min - N, c_max + N] of the previous retained rows are kept and
    become the new band; empty columns leave the band unchanged and
    contribute no foreground.
    """
    crop = np.asarray(crop)
    if crop.ndim != 2 or crop.dtype != np.bool_:
        raise ValueError("crop must be a 2-d bool array")
    h, w = crop.shape
    if not (0 <= baseline_row < h):
        raise ValueError("baseline_row outside crop")
    n_col = params.start_col
    if n_col is None:
        n_col = choose_start_column(crop, baseline_row, params.band_n)
    if not (0 <= n_col < w):
        raise ValueError(f"start column {n_col} outside crop of width {w}")

    band = params.band_n
    keep = np.zeros_like(crop)
    r0 = max(0, baseline_row - band)
    r1 = min(h, baseline_row + band + 1)
    seed_rows = np.flatnonzero(crop[r0:r1, n_col]) + r0
    if seed_rows.size == 0:
        raise TraceNotFoundError(
            f"seed column {n_col} has no foreground within {band} px of the baseline"
        )
    keep[seed_rows, n_col] = True
    seed_band = (int(seed_rows[0]), int(seed_rows[-1]))

    for cols in (range(n_col + 1, w), range(n_col - 1, -1, -1)):
        lo, hi = seed_band
        # band carries over empty columns in both passes
        for j in cols:
            w0 = max(0, lo - band)
            w1 = min(h, hi + band + 1)
            rows = np.flatnonzero(crop[w0:w1, j])
            if rows.size:
                rows += w0
                keep[rows, j] = True
                lo, hi = int(rows[0]), int(rows[-1])
    return TraceMask(foreground=keep, baseline_row=baseline_row)


def remove_isolated_pixels(mask: np.ndarray) -> np.ndarray:
    """Drop foreground pixels with no 8-connected foreground neighbor.

    Isolated pixels are nobody's neighbor, so one pass is idempotent.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError("mask must be a 2-d bool array")
    padded = np.pad(mask, 1, mode="constant")
    neighbors = np.zeros(mask.shape, dtype=np.uint8)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            neighbors += padded[1 + dr : 1 + dr + mask.shape[0], 1 + dc : 1 + dc + mask.shape[1]]
    return mask & (neighbors > 0)


def despeckle(mask: TraceMask) -> TraceMask:
    """remove_isolated_pixels wrapped for TraceMask values."""
    return TraceMask(
        foreground=remove_isolated_pixels(mask.foreground),
        baseline_row=mask.baseline_row,
    )


def keep_largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 8-connected foreground component.

    Speckle clusters survive single-pixel despeckling, so regions that
    are known to hold one connected stroke (the calibration pulse) are
    cleaned by discarding everything but the biggest component. Ties
    keep the component whose first pixel comes first in scan order.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError("mask must be a 2-d bool array")
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=np.uint8))
    if n <= 1:
        return mask.copy()
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0  # background does not compete
    return labels == int(np.argmax(sizes))


def extract_waveform(mask: TraceMask) -> RawTrace:
    """Collapse the trace mask to one value per column.

    Each column's value is the baseline row minus the mean row index of
    its foreground pixels (upward positive). Empty columns copy the
    previous column's value; leading empty columns copy backwards from
    the first filled one. The filled flags mark every copied column.
    """
    fg = mask.foreground
    h, w = fg.shape
    counts = fg.sum(axis=0)
    if not counts.any():
        raise TraceNotFoundError("mask has no foreground to extract")
    rows = np.arange(h, dtype=np.float64)
    sums = rows @ fg
    values = np.zeros(w, dtype=np.float64)
    nonzero = counts > 0
    values[nonzero] = mask.baseline_row - sums[nonzero] / counts[nonzero]
    filled = ~nonzero
    # forward fill, then backfill the leading gap from the first real column
    idx = np.where(nonzero, np.arange(w), -1)
    idx = np.maximum.accumulate(idx)
    first = int(np.flatnonzero(nonzero)[0])
    idx[idx < 0] = first
    values = values[idx]
    return RawTrace(values=values, filled=filled, baseline_row=mask.baseline_row)
