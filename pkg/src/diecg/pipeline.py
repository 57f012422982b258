"""End-to-end digitization of one printout page.

Wiring order: load, binarize, find baselines and separators, crop,
calibrate from the reference pulse (template fallback if unreadable),
then per lead: band-track, despeckle, extract, convert to mV, resample
to 200 Hz.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .calibrate import (
    Calibration,
    EcgSignal,
    calibration_from_pulse,
    fallback_calibration,
    measure_ref_pulse,
    resample_to_200hz,
    to_physical,
)
from .errors import CalibrationError, TraceNotFoundError
from .layout import (
    LeadLayout,
    TemplateConfig,
    crop_leads,
    detect_column_separators,
    detect_isoelectric_lines,
    extract_crop,
)
from .raster import GrayImage, VERTICAL, load_grayscale, otsu_binarize, projection_histogram
from .signalio import EcgRecord
from .trace import (
    TraceMask,
    TraceParams,
    despeckle,
    extract_waveform,
    keep_largest_component,
    remove_noise,
)

__all__ = ["DigitizeOptions", "DigitizeResult", "digitize_page", "digitize_image"]


@dataclass(frozen=True)
class DigitizeOptions:
    """Knobs that override template defaults for one run."""

    margin_l_px: int | None = None
    band_n_px: int | None = None
    t_lead: int | None = None  # truncate / zero-pad stored leads to this length
    debug_dir: Path | None = None


@dataclass
class DigitizeResult:
    record: EcgRecord
    layout: LeadLayout
    calibration: Calibration
    calibration_source: str  # "pulse" | "fallback"


def _fit_length(sig: EcgSignal, t_lead: int) -> EcgSignal:
    s = sig.samples
    if s.size >= t_lead:
        out = s[:t_lead].copy()
    else:
        out = np.zeros(t_lead, dtype=np.float64)
        out[: s.size] = s
    return EcgSignal(samples=out, fs=sig.fs, lead_name=sig.lead_name)


def _dump_mask(mask: np.ndarray, path: Path) -> None:
    from PIL import Image

    Image.fromarray(np.where(mask, 0, 255).astype(np.uint8), mode="L").save(path)


def digitize_page(
    img: GrayImage,
    cfg: TemplateConfig,
    record_id: str,
    class_label: str | None = None,
    options: DigitizeOptions | None = None,
    source_name: str = "",
) -> DigitizeResult:
    """Digitize an in-memory page into a 12-lead record."""
    opts = options or DigitizeOptions()
    binary = otsu_binarize(img)
    vhist = projection_histogram(binary, VERTICAL)
    baselines = detect_isoelectric_lines(vhist, cfg)
    separators = detect_column_separators(binary, baselines, cfg)
    layout = crop_leads(binary, baselines, separators, cfg, margin_l_px=opts.margin_l_px)

    if opts.debug_dir is not None:
        opts.debug_dir.mkdir(parents=True, exist_ok=True)
        _dump_mask(binary.foreground, opts.debug_dir / f"{record_id}.binary.png")

    calibration_source = "pulse"
    try:
        if layout.ref_pulse_region is None:
            raise CalibrationError("template defines no reference pulse region")
        region = layout.ref_pulse_region
        # the pulse is one connected stroke, so component filtering beats
        # per-pixel despeckling: speckle pairs near the plateau would
        # otherwise fragment the run used for the width measurement
        region_fg = keep_largest_component(extract_crop(binary, region))
        pulse = measure_ref_pulse(
            TraceMask(foreground=region_fg, baseline_row=region.baseline_row),
            cfg.ref_pulse,
        )
        calibration = calibration_from_pulse(pulse)
    except (CalibrationError, TraceNotFoundError):
        calibration = fallback_calibration(cfg)  # raises if no fallback scales
        calibration_source = "fallback"

    band_n = opts.band_n_px if opts.band_n_px is not None else cfg.band_n_px
    leads: dict[str, EcgSignal] = {}
    fill_fractions: dict[str, float] = {}
    for name, crop in layout.crops.items():
        fg = extract_crop(binary, crop)
        try:
            mask = remove_noise(fg, crop.baseline_row, TraceParams(band_n=band_n))
        except TraceNotFoundError as exc:
            raise TraceNotFoundError(f"lead {name}: {exc}") from exc
        mask = despeckle(mask)
        if opts.debug_dir is not None:
            _dump_mask(mask.foreground, opts.debug_dir / f"{record_id}.{name}.mask.png")
        raw = extract_waveform(mask)
        sig = resample_to_200hz(to_physical(raw, calibration, name))
        if opts.t_lead is not None:
            sig = _fit_length(sig, opts.t_lead)
        leads[name] = sig
        fill_fractions[name] = round(float(np.mean(raw.filled)), 6)

    provenance = {
        "source_image": source_name or record_id,
        "template_id": cfg.template_id,
        "px_per_second": calibration.px_per_second,
        "px_per_mv": calibration.px_per_mv,
        "calibration_source": calibration_source,
        "band_n_px": int(band_n),
        "margin_l_px": int(layout.margin_l),
        "baselines": [int(b) for b in layout.baselines],
        "separators": [int(s) for s in layout.separators],
        "crops": {
            n: [c.row0, c.row1, c.col0, c.col1] for n, c in layout.crops.items()
        },
        "fill_fractions": fill_fractions,
        "tool": {"name": "diecg", "version": __version__},
    }
    record = EcgRecord(
        record_id=record_id, leads=leads, class_label=class_label, provenance=provenance
    )
    return DigitizeResult(
        record=record,
        layout=layout,
        calibration=calibration,
        calibration_source=calibration_source,
    )


def digitize_image(
    path: str | Path,
    cfg: TemplateConfig,
    class_label: str | None = None,
    options: DigitizeOptions | None = None,
) -> DigitizeResult:
    """Digitize a printout image file into a 12-lead record."""
    path = Path(path)
    img = load_grayscale(path)
    return digitize_page(
        img,
        cfg,
        record_id=path.stem,
        class_label=class_label,
        options=options,
        source_name=path.name,
    )
