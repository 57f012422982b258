"""Page layout recovery: isoelectric lines, column separators, lead crops.

A printout template describes how 12 leads are arranged on the page
(rows x cols reading grid), where the reference pulse sits, and the
nominal scales to fall back on when the pulse is unreadable. Bundled
templates cover the four common printout formats; arbitrary layouts can
be loaded from YAML.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy.signal import find_peaks

from .errors import LayoutError
from .raster import BinaryImage, Histogram, VERTICAL

__all__ = [
    "STANDARD_LEADS",
    "RefPulseSpec",
    "LabelStrip",
    "PulseRegionSpec",
    "TemplateConfig",
    "CropRect",
    "LeadLayout",
    "load_template",
    "bundled_template",
    "bundled_template_ids",
    "detect_isoelectric_lines",
    "detect_column_separators",
    "crop_leads",
    "extract_crop",
]

# Canonical storage order for the 12 standard leads.
STANDARD_LEADS = (
    "I", "II", "III", "aVR", "aVL", "aVF",
    "V1", "V2", "V3", "V4", "V5", "V6",
)


@dataclass(frozen=True)
class RefPulseSpec:
    """Nominal calibration pulse: width in seconds, height in millivolts."""

    width_s: float = 0.1
    height_mv: float = 0.5


@dataclass(frozen=True)
class LabelStrip:
    """Region holding lead-name characters, as fractions of each crop."""

    col0: float = 0.0
    col1: float = 0.08
    row0: float = 0.0
    row1: float = 1.0


@dataclass(frozen=True)
class PulseRegionSpec:
    """Where the reference pulse lives: a column band anchored to a baseline."""

    col0_frac: float = 0.004
    col1_frac: float = 0.042
    baseline_index: int = 0


@dataclass
class TemplateConfig:
    """Declarative description of one printout format."""

    template_id: str
    rows: int
    cols: int
    lead_order: list[str]
    margin_l_frac: float = 0.08
    margin_l_px: int | None = None
    header_rows_hint: float = 0.10
    content_left_frac: float = 0.044
    content_right_frac: float = 0.010
    label_strip: LabelStrip = field(default_factory=LabelStrip)
    ref_pulse: RefPulseSpec = field(default_factory=RefPulseSpec)
    ref_pulse_region: PulseRegionSpec = field(default_factory=PulseRegionSpec)
    band_n_px: int = 7
    fallback_px_per_mv: float | None = None
    fallback_px_per_second: float | None = None

    def __post_init__(self):
        if self.rows * self.cols != 12:
            raise ValueError(
                f"{self.template_id}: rows*cols must be 12, got {self.rows}x{self.cols}"
            )
        if sorted(self.lead_order) != sorted(STANDARD_LEADS):
            raise ValueError(
                f"{self.template_id}: lead_order must be a permutation of the 12 standard leads"
            )
        if not (0 < self.margin_l_frac < 0.5):
            raise ValueError("margin_l_frac must lie in (0, 0.5)")
        if not (0 <= self.header_rows_hint < 0.5):
            raise ValueError("header_rows_hint must lie in [0, 0.5)")
        if self.ref_pulse.height_mv <= 0 or self.ref_pulse.width_s <= 0:
            raise ValueError("reference pulse dimensions must be positive")
        if self.band_n_px < 1:
            raise ValueError("band_n_px must be >= 1")


def _config_from_mapping(doc: dict, origin: str) -> TemplateConfig:
    if not isinstance(doc, dict):
        raise LayoutError(f"{origin}: template file must hold a mapping")
    schema = doc.pop("schema", "diecg-template/1")
    if schema != "diecg-template/1":
        raise LayoutError(f"{origin}: unknown template schema {schema!r}")
    try:
        for key, cls in (
            ("label_strip", LabelStrip),
            ("ref_pulse", RefPulseSpec),
            ("ref_pulse_region", PulseRegionSpec),
        ):
            if key in doc:
                doc[key] = cls(**doc[key])
        return TemplateConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise LayoutError(f"{origin}: bad template config: {exc}") from exc


def load_template(path: str | Path) -> TemplateConfig:
    """Load a template config from a YAML file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return _config_from_mapping(doc, path.name)


def bundled_template_ids() -> list[str]:
    files = resources.files("diecg.templates")
    return sorted(p.name[: -len(".yaml")] for p in files.iterdir() if p.name.endswith(".yaml"))


def bundled_template(template_id: str) -> TemplateConfig:
    """Load one of the package's bundled printout templates by id."""
    files = resources.files("diecg.templates")
    res = files / f"{template_id}.yaml"
    if not res.is_file():
        raise LayoutError(
            f"unknown template {template_id!r}; bundled: {', '.join(bundled_template_ids())}"
        )
    doc = yaml.safe_load(res.read_text(encoding="utf-8"))
    return _config_from_mapping(doc, f"{template_id}.yaml")


def save_template(cfg: TemplateConfig, path: str | Path) -> None:
    doc = {"schema": "diecg-template/1", **asdict(cfg)}
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


@dataclass
class CropRect:
    """Axis-aligned crop, half-open: rows [row0, row1), cols [col0, col1).

    ``baseline_row`` is the trace's isoelectric row in local coordinates.
    ``label_strip`` is a local half-open (r0, r1, c0, c1) rect to blank,
    or None. ``header_rows`` counts local rows at the top of the crop
    that overlap the page header; they are blanked along with the label
    strip so header text cannot leak into the trace band.
    """

    lead: str
    row0: int
    row1: int
    col0: int
    col1: int
    baseline_row: int
    label_strip: tuple[int, int, int, int] | None = None
    header_rows: int = 0

    def __post_init__(self):
        if self.row1 <= self.row0 or self.col1 <= self.col0:
            raise LayoutError(f"{self.lead}: degenerate crop {self!r}")
        if not (0 <= self.baseline_row < self.row1 - self.row0):
            raise LayoutError(f"{self.lead}: baseline outside crop")
        if not (0 <= self.header_rows <= self.baseline_row):
            raise LayoutError(f"{self.lead}: header rows would blank the baseline")

    @property
    def height(self) -> int:
        return self.row1 - self.row0

    @property
    def width(self) -> int:
        return self.col1 - self.col0


@dataclass
class LeadLayout:
    """Everything layout recovery found on one page."""

    baselines: list[int]
    separators: list[int]
    crops: dict[str, CropRect]
    ref_pulse_region: CropRect | None
    margin_l: int
    spacing: int


def _top_peaks(counts: np.ndarray, distance: int, count: int, lo: int = 0) -> np.ndarray:
    """Positions of the ``count`` most prominent local maxima at or after lo."""
    peaks, props = find_peaks(counts, distance=max(1, distance), prominence=0)
    keep = peaks >= lo
    peaks, prom = peaks[keep], props["prominences"][keep]
    if peaks.size < count:
        return np.sort(peaks)
    order = np.argsort(prom, kind="stable")[::-1][:count]
    return np.sort(peaks[order])


def detect_isoelectric_lines(hist: Histogram, cfg: TemplateConfig) -> list[int]:
    """Find the page rows holding the isoelectric line of each lead row.

    Trace pixels concentrate on the isoelectric rows, so the vertical
    projection histogram peaks there. The most prominent ``cfg.rows``
    peaks win, subject to a minimum separation of height/(2*rows);
    anything inside the top ``header_rows_hint`` fraction of the page is
    discarded before ranking (header rules and text also project as
    peaks).
    """
    if hist.axis != VERTICAL:
        raise ValueError("isoelectric detection expects a vertical histogram")
    height = len(hist.counts)
    header_px = int(round(cfg.header_rows_hint * height))
    rows = _top_peaks(hist.counts, height // (2 * cfg.rows), cfg.rows, lo=header_px)
    if rows.size < cfg.rows:
        raise LayoutError(
            f"found {rows.size} isoelectric lines, template {cfg.template_id} needs {cfg.rows}"
        )
    return [int(r) for r in rows]


def detect_column_separators(
    img: BinaryImage, baselines: list[int], cfg: TemplateConfig
) -> list[int]:
    """Find the vertical rule columns separating lead columns.

    Counts foreground per column over the band of rows spanned by the
    baselines (plus half a row spacing each side, so the rules dominate
    QRS strokes) and keeps the cols-1 most prominent peaks at least
    width/(2*cols) apart. Single-column templates have no separators.
    """
    if cfg.cols == 1:
        return []
    spacing = _row_spacing(baselines, img.height)
    r0 = max(0, baselines[0] - spacing // 2)
    r1 = min(img.height, baselines[-1] + spacing // 2 + 1)
    counts = img.foreground[r0:r1].sum(axis=0).astype(np.int64)
    cols = _top_peaks(counts, img.width // (2 * cfg.cols), cfg.cols - 1)
    if cols.size < cfg.cols - 1:
        raise LayoutError(
            f"found {cols.size} column separators, template {cfg.template_id} needs {cfg.cols - 1}"
        )
    return [int(c) for c in cols]


def _row_spacing(baselines: list[int], height: int) -> int:
    if len(baselines) > 1:
        return int(round(float(np.median(np.diff(baselines)))))
    return height // 2


def _resolve_margin_l(cfg: TemplateConfig, spacing: int, override: int | None) -> int:
    if override is not None:
        return max(1, int(override))
    if cfg.margin_l_px is not None:
        return max(1, int(cfg.margin_l_px))
    return max(1, int(round(cfg.margin_l_frac * spacing)))


def crop_leads(
    img: BinaryImage,
    baselines: list[int],
    separators: list[int],
    cfg: TemplateConfig,
    margin_l_px: int | None = None,
) -> LeadLayout:
    """Split the page into per-lead crops plus the reference pulse region.

    Vertically, the crop of the trace with baseline b_k runs from just
    below the previous baseline's lower margin (b_{k-1} + L + 1) down to
    b_k + L, so upward deflections keep the whole inter-baseline gap and
    downward ones get the small margin L. The first row gets a full
    spacing of headroom, clamped to the page. Horizontally, the content
    span between the configured page margins is cut at the separators.
    Crops are pairwise disjoint and each contains its own baseline.
    """
    if sorted(baselines) != list(baselines) or len(set(baselines)) != len(baselines):
        raise LayoutError("baselines must be strictly increasing")
    if len(baselines) != cfg.rows:
        raise LayoutError(f"expected {cfg.rows} baselines, got {len(baselines)}")
    if len(separators) != cfg.cols - 1:
        raise LayoutError(f"expected {cfg.cols - 1} separators, got {len(separators)}")
    height, width = img.height, img.width
    spacing = _row_spacing(baselines, height)
    margin_l = _resolve_margin_l(cfg, spacing, margin_l_px)

    content_l = int(round(cfg.content_left_frac * width))
    content_r = width - int(round(cfg.content_right_frac * width))
    bounds = [content_l, *separators, content_r]
    if sorted(bounds) != bounds or len(set(bounds)) != len(bounds):
        raise LayoutError("separators must fall inside the content span, in order")

    header_px = int(round(cfg.header_rows_hint * height))
    crops: dict[str, CropRect] = {}
    for r, b in enumerate(baselines):
        row1 = min(height, b + margin_l + 1)
        if r == 0:
            row0 = max(0, b - (spacing - margin_l - 1))
        else:
            row0 = baselines[r - 1] + margin_l + 1
        for c in range(cfg.cols):
            lead = cfg.lead_order[r * cfg.cols + c]
            # separator rules stay outside the crop: 1 px standoff
            col0 = bounds[c] + (1 if c > 0 else 0)
            col1 = bounds[c + 1] - (1 if c + 1 < len(bounds) - 1 else 0)
            strip = _label_strip_rect(cfg.label_strip, row1 - row0, col1 - col0)
            crops[lead] = CropRect(
                lead=lead,
                row0=row0,
                row1=row1,
                col0=col0,
                col1=col1,
                baseline_row=b - row0,
                label_strip=strip,
                header_rows=min(max(0, header_px - row0), b - row0),
            )
    ordered = {name: crops[name] for name in STANDARD_LEADS}

    pr = cfg.ref_pulse_region
    pulse = None
    if pr is not None:
        b = baselines[pr.baseline_index]
        p_row0 = max(0, b - int(math.ceil(0.45 * spacing)))
        p_row1 = min(height, b + margin_l + 1)
        p_col0 = int(round(pr.col0_frac * width))
        p_col1 = int(round(pr.col1_frac * width))
        if p_col1 > p_col0 and p_row1 > p_row0:
            pulse = CropRect(
                lead="__pulse__",
                row0=p_row0,
                row1=p_row1,
                col0=p_col0,
                col1=p_col1,
                baseline_row=b - p_row0,
            )
    return LeadLayout(
        baselines=list(baselines),
        separators=list(separators),
        crops=ordered,
        ref_pulse_region=pulse,
        margin_l=margin_l,
        spacing=spacing,
    )


def _label_strip_rect(
    strip: LabelStrip | None, crop_h: int, crop_w: int
) -> tuple[int, int, int, int] | None:
    if strip is None:
        return None
    r0 = int(round(strip.row0 * crop_h))
    r1 = int(round(strip.row1 * crop_h))
    c0 = int(round(strip.col0 * crop_w))
    c1 = int(round(strip.col1 * crop_w))
    if r1 <= r0 or c1 <= c0:
        return None
    return (r0, r1, c0, c1)


def extract_crop(img: BinaryImage, crop: CropRect, blank_label: bool = True) -> np.ndarray:
    """Copy a crop's foreground, blanking its label strip and header rows."""
    fg = img.foreground[crop.row0 : crop.row1, crop.col0 : crop.col1].copy()
    if blank_label and crop.label_strip is not None:
        r0, r1, c0, c1 = crop.label_strip
        fg[r0:r1, c0:c1] = False
    if blank_label and crop.header_rows > 0:
        fg[: crop.header_rows, :] = False
    return fg
