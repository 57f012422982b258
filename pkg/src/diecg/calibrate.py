"""Calibration from the reference square pulse, unit conversion, resampling.

Printouts carry a square calibration pulse (0.5 mV tall, 0.1 s or 0.2 s
wide). Measuring it in pixels fixes both axes: px/mV vertically and
px/s horizontally. When the pulse is unreadable the template's nominal
scales keep the pipeline going, flagged in provenance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, UpsamplingWarning
from .layout import RefPulseSpec, TemplateConfig
from .trace import RawTrace, TraceMask

__all__ = [
    "TARGET_FS",
    "RefPulse",
    "Calibration",
    "EcgSignal",
    "measure_ref_pulse",
    "calibration_from_pulse",
    "fallback_calibration",
    "to_physical",
    "resample_to_200hz",
]

TARGET_FS = 200.0

# a plateau must be near-constant within this many pixels...
PLATEAU_TOL_PX = 2.0
# ...and at least this many columns long to count as the pulse top
MIN_PLATEAU_PX = 3


@dataclass(frozen=True)
class RefPulse:
    """Measured pulse dimensions in pixels, plus its nominal meaning."""

    width_px: int
    height_px: float
    spec: RefPulseSpec

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise CalibrationError("reference pulse must have positive extent")


@dataclass(frozen=True)
class Calibration:
    """Pixel-to-physical scales for one page."""

    px_per_second: float
    px_per_mv: float

    def __post_init__(self):
        if self.px_per_second <= 0 or self.px_per_mv <= 0:
            raise CalibrationError("calibration scales must be positive")


@dataclass
class EcgSignal:
    """One lead as a uniformly sampled voltage series.

    samples are in millivolts; fs is the sampling rate in Hz (the native
    column rate right after unit conversion, 200 exactly after
    resampling).
    """

    samples: np.ndarray
    fs: float
    lead_name: str

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("EcgSignal needs a non-empty 1-d sample array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("EcgSignal samples must be finite")
        if self.fs <= 0:
            raise ValueError("fs must be positive")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.fs


def measure_ref_pulse(
    region: TraceMask,
    spec: RefPulseSpec,
    plateau_tol: float = PLATEAU_TOL_PX,
) -> RefPulse:
    """Measure the calibration pulse inside its cropped region.

    Each column collapses to an amplitude: the baseline row minus the
    median foreground row. The median shrugs off specks attached to the
    stroke, which would pull a mean far enough to clip a column off the
    plateau. The pulse top is the longest run of near-constant (within
    plateau_tol px) strictly positive amplitude; width is the run length
    in columns, height the run's mean amplitude. The flat lead-in and
    lead-out sit at zero, so positivity excludes them.
    """
    fg = region.foreground
    vals = np.zeros(fg.shape[1], dtype=np.float64)
    for j in range(fg.shape[1]):
        rows = np.flatnonzero(fg[:, j])
        if rows.size:  # empty columns stay 0: gaps cannot join the plateau
            vals[j] = region.baseline_row - float(np.median(rows))
    best_len, best_start = 0, -1
    start = 0
    w = vals.size
    while start < w:
        if vals[start] <= plateau_tol:
            start += 1
            continue
        lo = hi = vals[start]
        end = start
        while end + 1 < w and vals[end + 1] > plateau_tol:
            nlo = min(lo, vals[end + 1])
            nhi = max(hi, vals[end + 1])
            if nhi - nlo > plateau_tol:
                break
            lo, hi = nlo, nhi
            end += 1
        if end - start + 1 > best_len:
            best_len, best_start = end - start + 1, start
        start = end + 1
    if best_len < MIN_PLATEAU_PX:
        raise CalibrationError(
            f"no plateau of at least {MIN_PLATEAU_PX} columns found in the pulse region"
        )
    run = vals[best_start : best_start + best_len]
    return RefPulse(width_px=best_len, height_px=float(run.mean()), spec=spec)


def calibration_from_pulse(pulse: RefPulse) -> Calibration:
    return Calibration(
        px_per_second=pulse.width_px / pulse.spec.width_s,
        px_per_mv=pulse.height_px / pulse.spec.height_mv,
    )


def fallback_calibration(cfg: TemplateConfig) -> Calibration:
    """Template nominal scales, for pages whose pulse cannot be measured."""
    if cfg.fallback_px_per_mv is None or cfg.fallback_px_per_second is None:
        raise CalibrationError(
            f"template {cfg.template_id} has no fallback scales and the pulse was unusable"
        )
    return Calibration(
        px_per_second=float(cfg.fallback_px_per_second),
        px_per_mv=float(cfg.fallback_px_per_mv),
    )


def to_physical(raw: RawTrace, cal: Calibration, lead_name: str) -> EcgSignal:
    """Convert per-column pixel amplitudes to millivolts at the column rate."""
    return EcgSignal(
        samples=raw.values / cal.px_per_mv,
        fs=cal.px_per_second,
        lead_name=lead_name,
    )


def resample_to_200hz(sig: EcgSignal) -> EcgSignal:
    """Linearly resample a signal onto the uniform 200 Hz grid.

    Output length is round(n / fs * 200); sample k sits at t = k/200 s.
    Native rates below a quarter of the target get an UpsamplingWarning,
    the result is then mostly interpolation.
    """
    native = sig.fs
    if native == TARGET_FS:
        return EcgSignal(sig.samples.copy(), TARGET_FS, sig.lead_name)
    if native < TARGET_FS / 4:
        warnings.warn(
            f"native rate {native:.1f} Hz is far below 200 Hz; output is mostly interpolated",
            UpsamplingWarning,
            stacklevel=2,
        )
    n = sig.samples.size
    m = max(1, int(round(n / native * TARGET_FS)))
    t_out = np.arange(m) / TARGET_FS
    t_in = np.arange(n) / native
    samples = np.interp(t_out, t_in, sig.samples)
    return EcgSignal(samples=samples, fs=TARGET_FS, lead_name=sig.lead_name)
