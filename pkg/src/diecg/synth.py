"""Synthetic printout renderer: the round-trip oracle for the digitizer.

Pages are drawn from analytic waveforms with known geometry, so every
rendered pixel has a ground truth behind it: baseline rows, separator
columns, per-column amplitudes in mV, R-peak times, reference pulse
dimensions. A truth sidecar (JSON, schema ``diecg-truth/1``) rides along
with each page.

Strokes are rasterized so that the column-mean of the stroke recovers
the waveform: each column paints the span between the midpoints to its
neighbors, centered thickening. The calibration pulse is drawn with
exact integer plateau width and height.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import RenderError
from .layout import TemplateConfig, bundled_template, crop_leads
from .quality import QA_LEAD, RPeakSet
from .raster import BinaryImage, GrayImage
from .signalio import CLASS_NAMES, EcgRecord, atomic_write_text

__all__ = [
    "TRUTH_SCHEMA",
    "SynthSpec",
    "PageGeometry",
    "PAGE_PRESETS",
    "pqrst_waveform",
    "pqrst_from_beats",
    "sine_waveform",
    "render",
    "perturb",
    "write_page",
    "load_truth",
    "generate_corpus",
    "truth_annotations",
]

TRUTH_SCHEMA = "diecg-truth/1"

INK = 30
SEPARATOR_INK = 45
GRID_DEFAULT = 228

# Gaussian bumps (amp mV, center s, sigma s); R amplitude is per spec.
# Sigmas are wide enough that stroke tops climb well under the default
# tracking band width per column at every preset's scale.
_PQST = (
    ("P", 0.08, -0.17, 0.018),
    ("Q", -0.08, -0.045, 0.010),
    ("S", -0.10, 0.048, 0.011),
    ("T", 0.22, 0.21, 0.040),
)
_R_SIGMA = 0.024
# R apexes keep this far from the strip edges so every rendered beat is
# also a listed beat.
_EDGE_GUARD_S = 0.1


@dataclass(frozen=True)
class PageGeometry:
    """Fixed pixel geometry used when rendering one template."""

    width: int
    height: int
    baselines: tuple[int, ...]
    px_per_second: float
    px_per_mv: float
    grid_step: int
    header_line_rows: tuple[int, ...]
    separator_thickness: int = 1


PAGE_PRESETS: dict[str, PageGeometry] = {
    "template1": PageGeometry(1500, 950, (230, 480, 730), 140.0, 80.0, 8, (34, 56), 1),
    "template2": PageGeometry(
        1400, 1150, (180, 340, 500, 660, 820, 980), 120.0, 70.0, 7, (30, 52), 2
    ),
    "template3": PageGeometry(
        1350, 1430, tuple(150 + 110 * k for k in range(12)), 120.0, 60.0, 6, (28, 46), 1
    ),
    "template4": PageGeometry(1440, 1100, (240, 480, 720, 960), 150.0, 84.0, 8, (32, 58), 2),
}


@dataclass
class SynthSpec:
    """Parameters for one synthetic page."""

    template_id: str = "template1"
    waveform: str = "pqrst"  # pqrst | sine | flat
    heart_rate_bpm: float = 75.0
    amplitude_mv: float = 1.0  # R height (pqrst) or sine amplitude
    sine_freq_hz: float = 1.0
    trace_thickness_px: int = 3
    speckle_density: float = 0.0
    grid_intensity: int = GRID_DEFAULT
    seed: int = 0
    class_label: str | None = None

    def __post_init__(self):
        if self.waveform not in ("pqrst", "sine", "flat"):
            raise RenderError(f"unknown waveform {self.waveform!r}")
        if not (20.0 <= self.heart_rate_bpm <= 300.0):
            raise RenderError("heart_rate_bpm must lie in [20, 300]")
        if self.trace_thickness_px < 1 or self.trace_thickness_px > 5:
            raise RenderError("trace_thickness_px must lie in [1, 5]")
        if not (0.0 <= self.speckle_density < 0.05):
            raise RenderError("speckle_density must lie in [0, 0.05)")
        if not (0 <= self.grid_intensity <= 255):
            raise RenderError("grid_intensity must be a byte value")


def pqrst_waveform(
    t: np.ndarray, bpm: float, r_amp_mv: float = 1.0, phase_s: float = 0.0
) -> np.ndarray:
    """Periodic PQRST complex as a sum of Gaussian bumps, R apex at phase_s."""
    t = np.asarray(t, dtype=np.float64)
    period = 60.0 / bpm
    # signed distance to the nearest apex
    dt = (t - phase_s + period / 2.0) % period - period / 2.0
    return _pqrst_of_dt(dt, r_amp_mv)


def pqrst_from_beats(t: np.ndarray, beat_times: list[float], r_amp_mv: float = 1.0) -> np.ndarray:
    """Finite beat train: one PQRST complex per listed apex, nothing else.

    Unlike the periodic form this renders no beats outside the list, so
    a strip built from it has exactly the R apexes it claims to have.
    """
    t = np.asarray(t, dtype=np.float64)
    w = np.zeros_like(t)
    for tk in beat_times:
        w += _pqrst_of_dt(t - tk, r_amp_mv)
    return w


def _pqrst_of_dt(dt: np.ndarray, r_amp_mv: float) -> np.ndarray:
    w = r_amp_mv * np.exp(-(dt**2) / (2.0 * _R_SIGMA**2))
    for _, amp, mu, sigma in _PQST:
        w += amp * np.exp(-((dt - mu) ** 2) / (2.0 * sigma**2))
    return w


def sine_waveform(t: np.ndarray, freq_hz: float, amp_mv: float) -> np.ndarray:
    return amp_mv * np.sin(2.0 * np.pi * freq_hz * np.asarray(t, dtype=np.float64))


def _paint(page: np.ndarray, r0: int, r1: int, c0: int, c1: int, level: int) -> None:
    r0, r1 = max(0, r0), min(page.shape[0], r1)
    c0, c1 = max(0, c0), min(page.shape[1], c1)
    if r1 > r0 and c1 > c0:
        np.minimum(page[r0:r1, c0:c1], np.uint8(level), out=page[r0:r1, c0:c1])


def _draw_polyline(page: np.ndarray, col0: int, ys: np.ndarray, thickness: int) -> None:
    """Column-wise stroke whose column mean equals the polyline height.

    Each column covers the span between the midpoints to its neighbors
    so consecutive columns stay 8-connected at any slope, then thickens
    symmetrically (odd) or one extra row downward (even).
    """
    n = ys.size
    up = (thickness - 1) // 2
    down = thickness // 2
    for j in range(n):
        prev_mid = ys[j] if j == 0 else 0.5 * (ys[j - 1] + ys[j])
        next_mid = ys[j] if j == n - 1 else 0.5 * (ys[j] + ys[j + 1])
        lo = min(prev_mid, next_mid, ys[j])
        hi = max(prev_mid, next_mid, ys[j])
        r0 = int(round(lo)) - up
        r1 = int(round(hi)) + down
        _paint(page, r0, r1 + 1, col0 + j, col0 + j + 1, INK)


def _draw_grid(page: np.ndarray, geom: PageGeometry, intensity: int) -> None:
    step = geom.grid_step
    for r in range(step, geom.height, step):
        level = intensity if (r // step) % 5 else max(0, intensity - 8)
        _paint(page, r, r + 1, 0, geom.width, level)
    for c in range(step, geom.width, step):
        level = intensity if (c // step) % 5 else max(0, intensity - 8)
        _paint(page, 0, geom.height, c, c + 1, level)


def _draw_label(page: np.ndarray, rng: np.random.Generator, r0: int, c0: int) -> None:
    # a couple of character-ish strokes; exact shapes do not matter
    _paint(page, r0, r0 + 9, c0, c0 + 2, INK)
    _paint(page, r0 + 4, r0 + 5, c0 + 2, c0 + 6, INK)
    if rng.random() < 0.5:
        _paint(page, r0, r0 + 9, c0 + 6, c0 + 8, INK)
    else:
        _paint(page, r0 + 7, r0 + 9, c0 + 2, c0 + 7, INK)


def _separator_columns(geom: PageGeometry, cfg: TemplateConfig) -> list[int]:
    if cfg.cols == 1:
        return []
    content_l = int(round(cfg.content_left_frac * geom.width))
    content_r = geom.width - int(round(cfg.content_right_frac * geom.width))
    span = content_r - content_l
    return [content_l + int(round(span * c / cfg.cols)) for c in range(1, cfg.cols)]


def _beat_times(duration_s: float, bpm: float, u: float) -> list[float]:
    """Apex times tiled every period, all at least guard from both edges."""
    period = 60.0 / bpm
    g = _EDGE_GUARD_S
    if duration_s < 2 * g + period:
        raise RenderError(
            f"strip of {duration_s:.2f} s cannot hold two beats at {bpm:.0f} bpm"
        )
    phase = g + u * (period - 2 * g)
    if phase + period > duration_s - g:  # keep at least two beats in range
        phase = g
    m = int(math.floor((duration_s - g - phase) / period)) + 1
    return [phase + k * period for k in range(m)]


def render(spec: SynthSpec, cfg: TemplateConfig | None = None) -> tuple[GrayImage, dict]:
    """Draw one synthetic printout page; returns the page and its truth."""
    if spec.template_id not in PAGE_PRESETS:
        raise RenderError(f"no page preset for template {spec.template_id!r}")
    geom = PAGE_PRESETS[spec.template_id]
    if cfg is None:
        cfg = bundled_template(spec.template_id)
    if cfg.rows != len(geom.baselines):
        raise RenderError("template rows disagree with the page preset")
    rng = np.random.default_rng(spec.seed)
    pps, pxmv = geom.px_per_second, geom.px_per_mv

    page = np.full((geom.height, geom.width), 252, dtype=np.uint8)
    _draw_grid(page, geom, spec.grid_intensity)
    for r in geom.header_line_rows:
        _paint(page, r, r + 2, 0, geom.width, 40)
    for _ in range(60):  # header text specks
        r = int(rng.integers(6, max(7, geom.header_line_rows[0] - 8)))
        c = int(rng.integers(10, geom.width - 10))
        _paint(page, r, r + 2, c, c + 2, INK)

    separators = _separator_columns(geom, cfg)
    spacing = int(round(float(np.median(np.diff(geom.baselines))))) if cfg.rows > 1 else geom.height // 2
    for s in separators:
        _paint(
            page,
            geom.baselines[0] - int(0.4 * spacing),
            geom.baselines[-1] + int(0.4 * spacing),
            s,
            s + geom.separator_thickness,
            SEPARATOR_INK,
        )

    # reuse the detector's own crop arithmetic so truth and detection agree
    blank = BinaryImage(np.zeros((geom.height, geom.width), dtype=bool))
    layout = crop_leads(blank, list(geom.baselines), separators, cfg)

    # reference pulse: exact integer plateau width and height
    pulse_w = int(round(cfg.ref_pulse.width_s * pps))
    pulse_h = int(round(cfg.ref_pulse.height_mv * pxmv))
    b0 = geom.baselines[cfg.ref_pulse_region.baseline_index]
    region = layout.ref_pulse_region
    pc0 = region.col0 + (region.col1 - region.col0 - pulse_w) // 2
    if pc0 - 2 <= region.col0 or pc0 + pulse_w + 2 >= region.col1:
        raise RenderError("reference pulse does not fit its region")
    _paint(page, b0 - 1, b0 + 2, region.col0 + 1, pc0 - 1, INK)  # lead-in
    _paint(page, b0 - 1, b0 + 2, pc0 + pulse_w + 1, region.col1 - 1, INK)  # lead-out
    # edges reach one row past the baseline so their ink is symmetric
    # about it, like the flats; a lopsided edge tilts the row histogram
    _paint(page, b0 - pulse_h, b0 + 2, pc0 - 1, pc0, INK)  # rising edge
    _paint(page, b0 - pulse_h, b0 + 2, pc0 + pulse_w, pc0 + pulse_w + 1, INK)  # falling edge
    _paint(page, b0 - pulse_h - 1, b0 - pulse_h + 2, pc0, pc0 + pulse_w, INK)  # plateau

    down_room = int(round(cfg.margin_l_frac * spacing)) - 2
    up_room = spacing - int(round(cfg.margin_l_frac * spacing)) - 3

    leads_truth = []
    for name, crop in layout.crops.items():
        strip_cols = crop.label_strip[3] if crop.label_strip else 0
        trace_col0 = crop.col0 + strip_cols + 2
        trace_col1 = crop.col1 - 1
        n_cols = trace_col1 - trace_col0
        if n_cols < 16:
            raise RenderError(f"lead {name}: trace span of {n_cols} columns is too narrow")
        b = crop.row0 + crop.baseline_row
        t = np.arange(n_cols, dtype=np.float64) / pps
        duration = n_cols / pps
        r_times: list[float] = []
        if spec.waveform == "pqrst":
            r_times = _beat_times(duration, spec.heart_rate_bpm, float(rng.random()))
            w = pqrst_from_beats(t, r_times, spec.amplitude_mv)
        elif spec.waveform == "sine":
            w = sine_waveform(t, spec.sine_freq_hz, spec.amplitude_mv)
        else:
            w = np.zeros_like(t)
        up_px = float(w.max()) * pxmv
        down_px = -float(w.min()) * pxmv
        if up_px > up_room or down_px > down_room:
            raise RenderError(
                f"lead {name}: waveform needs {up_px:.0f}px up / {down_px:.0f}px down, "
                f"room is {up_room}px / {down_room}px"
            )
        _draw_polyline(page, trace_col0, b - w * pxmv, spec.trace_thickness_px)
        _draw_label(page, rng, r0=b - 30 if b >= 32 else crop.row0 + 2, c0=crop.col0 + 3)
        leads_truth.append(
            {
                "lead": name,
                "baseline_row": b,
                "crop_col0": crop.col0,
                "trace_col0": trace_col0,
                "trace_col1": trace_col1,
                "amplitudes_mv": [round(float(v), 6) for v in w],
                "r_peak_times_s": [round(tt, 9) for tt in r_times],
                "r_peak_cols": [round(trace_col0 + tt * pps, 3) for tt in r_times],
            }
        )

    if spec.speckle_density > 0:
        n_speckles = int(round(spec.speckle_density * page.size))
        flat_idx = rng.choice(page.size, size=n_speckles, replace=False)
        page.ravel()[flat_idx] = np.minimum(page.ravel()[flat_idx], 40)

    truth = {
        "schema": TRUTH_SCHEMA,
        "template_id": spec.template_id,
        "page": {"width": geom.width, "height": geom.height},
        "px_per_second": pps,
        "px_per_mv": pxmv,
        "baselines": list(geom.baselines),
        "separators": separators,
        "pulse": {
            "col0": pc0,
            "width_px": pulse_w,
            "height_px": pulse_h,
            "baseline_row": b0,
        },
        "waveform": spec.waveform,
        "heart_rate_bpm": spec.heart_rate_bpm,
        "amplitude_mv": spec.amplitude_mv,
        "class_label": spec.class_label,
        "seed": spec.seed,
        "leads": {row["lead"]: row for row in leads_truth},
    }
    return GrayImage(page), truth


def perturb(
    img: GrayImage,
    speckle_density: float = 0.0,
    grid_intensity: int | None = None,
    seed: int = 0,
) -> GrayImage:
    """Degrade a page: sprinkle isolated dark speckles, darken grid pixels.

    grid_intensity rewrites mid-tone pixels (anything clearly neither ink
    nor paper) to the given level, pushing the grid toward the ink class.
    With density 0 and no grid level this is the identity.
    """
    page = img.pixels.copy()
    if grid_intensity is not None:
        mid = (page > 60) & (page < 245)
        page[mid] = np.minimum(page[mid], np.uint8(grid_intensity))
    if speckle_density > 0:
        rng = np.random.default_rng(seed)
        n = int(round(speckle_density * page.size))
        flat_idx = rng.choice(page.size, size=n, replace=False)
        page.ravel()[flat_idx] = np.minimum(page.ravel()[flat_idx], 40)
    return GrayImage(page)


def write_page(img: GrayImage, truth: dict, out_dir: str | Path, stem: str) -> tuple[Path, Path]:
    """Save a rendered page as PNG plus its truth sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    png = out_dir / f"{stem}.png"
    Image.fromarray(img.pixels, mode="L").save(png)
    sidecar = out_dir / f"{stem}.truth.json"
    atomic_write_text(sidecar, json.dumps(truth, sort_keys=True) + "\n")
    return png, sidecar


def load_truth(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or doc.get("schema") != TRUTH_SCHEMA:
        raise RenderError(f"{Path(path).name}: expected schema {TRUTH_SCHEMA!r}")
    return doc


def generate_corpus(
    template_ids: list[str],
    count_per_template: int,
    seed: int,
    out_dir: str | Path,
    label_classes: tuple[str, ...] = CLASS_NAMES,
) -> Path:
    """Render a labeled corpus; returns the manifest CSV path.

    Per-image parameters come from an rng seeded with (seed, image
    index), so a (template_ids, count, seed) triple always reproduces
    the same corpus byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    i = 0
    for tid in template_ids:
        for k in range(count_per_template):
            rng = np.random.default_rng([seed, i])
            spec = SynthSpec(
                template_id=tid,
                heart_rate_bpm=float(np.round(rng.uniform(50.0, 140.0), 1)),
                amplitude_mv=float(np.round(rng.uniform(0.8, 1.4), 3)),
                trace_thickness_px=int(rng.choice([2, 3, 3])),
                speckle_density=float(rng.choice([0.0, 0.0005, 0.001, 0.0015])),
                seed=int(rng.integers(2**31 - 1)),
                class_label=label_classes[i % len(label_classes)] if label_classes else None,
            )
            stem = f"{tid}_s{seed}_{k:03d}"
            img, truth = render(spec)
            png, _ = write_page(img, truth, out_dir, stem)
            rows.append((png.name, tid, spec.class_label or ""))
            i += 1
    manifest = out_dir / "manifest.csv"
    lines = ["path,template_id,class_label"]
    lines += [",".join(row) for row in rows]
    atomic_write_text(manifest, "\n".join(lines) + "\n")
    return manifest


def truth_annotations(record: EcgRecord, truth: dict) -> RPeakSet:
    """Map the truth R-peak columns of the QA lead onto record samples.

    Uses the record's own crop column origin (provenance) and the true
    px/s scale, so the annotation is on the same time axis as the
    digitized signal.
    """
    lead = truth["leads"][QA_LEAD]
    crops = record.provenance.get("crops", {})
    if QA_LEAD not in crops:
        raise RenderError(f"record {record.record_id} lacks crop provenance for lead {QA_LEAD}")
    col0 = crops[QA_LEAD][2]
    pps = float(truth["px_per_second"])
    idx = [int(round((c - col0) / pps * 200.0)) for c in lead["r_peak_cols"]]
    return RPeakSet(record_id=record.record_id, peaks=np.asarray(sorted(set(idx)), dtype=np.int64))
