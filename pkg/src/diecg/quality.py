"""Digitization quality assessment via RR intervals.

The check digitizes printouts whose R-peak positions are known, detects
R peaks on the digitized lead II, and compares mean RR intervals per
record. The headline number is the mean absolute error of those means,
reported per class and overall.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.signal import find_peaks

from .calibrate import EcgSignal
from .errors import AlignmentError, RecordSchemaError, UndefinedResultError
from .signalio import EcgRecord, atomic_write_text

__all__ = [
    "RPEAKS_SCHEMA",
    "QA_LEAD",
    "RPeakSet",
    "QaRecordEntry",
    "QaReport",
    "detect_r_peaks",
    "rr_mean_ms",
    "mae_rr",
    "build_qa_report",
    "write_annotations",
    "read_annotations",
]

RPEAKS_SCHEMA = "diecg-rpeaks/1"
QA_LEAD = "II"

# refractory period between detections, seconds
_REFRACTORY_S = 0.2
# adaptive threshold: fraction of the rolling max over this window
_THRESH_FRAC = 0.5
_ROLLING_S = 2.0
_SMOOTH_S = 0.15


@dataclass
class RPeakSet:
    """R-peak sample indices for one record's QA lead."""

    record_id: str
    peaks: np.ndarray
    lead: str = QA_LEAD

    def __post_init__(self):
        self.peaks = np.asarray(self.peaks, dtype=np.int64)
        if self.peaks.ndim != 1:
            raise ValueError("peaks must be a 1-d index array")
        if self.peaks.size and not np.all(np.diff(self.peaks) > 0):
            raise ValueError("peaks must be strictly increasing")


def detect_r_peaks(sig: EcgSignal, record_id: str = "") -> RPeakSet:
    """Detect R peaks by slope energy with an adaptive threshold.

    The statistic is the squared derivative smoothed over ~150 ms. A
    candidate peak counts when it reaches half the rolling 2 s maximum
    of the statistic; detections are at least 200 ms apart. A flat (or
    sub-second) signal yields no peaks rather than an error.
    """
    s = sig.samples
    fs = sig.fs
    if s.size < fs:
        return RPeakSet(record_id=record_id, peaks=np.empty(0, dtype=np.int64))
    stat = np.gradient(s) ** 2
    win = max(3, int(round(_SMOOTH_S * fs)) | 1)
    stat = np.convolve(stat, np.ones(win) / win, mode="same")
    rolling = maximum_filter1d(stat, size=max(3, int(round(_ROLLING_S * fs))), mode="nearest")
    cand, _ = find_peaks(stat, distance=max(1, int(round(_REFRACTORY_S * fs))))
    keep = cand[(stat[cand] >= _THRESH_FRAC * rolling[cand]) & (stat[cand] > 0)]
    return RPeakSet(record_id=record_id, peaks=keep.astype(np.int64))


def rr_mean_ms(peaks: RPeakSet | np.ndarray, fs: float) -> float:
    """Mean RR interval in milliseconds; undefined below two peaks."""
    idx = peaks.peaks if isinstance(peaks, RPeakSet) else np.asarray(peaks)
    if idx.size < 2:
        raise UndefinedResultError(f"need at least 2 peaks for an RR mean, got {idx.size}")
    return float(np.mean(np.diff(idx)) * 1000.0 / fs)


def mae_rr(truth_ms, predicted_ms) -> float:
    """Mean absolute error between paired per-record RR means (ms)."""
    t = np.asarray(truth_ms, dtype=np.float64)
    p = np.asarray(predicted_ms, dtype=np.float64)
    if t.shape != p.shape or t.ndim != 1:
        raise AlignmentError(f"RR mean lists differ in shape: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise AlignmentError("RR mean lists are empty")
    return float(np.mean(np.abs(t - p)))


@dataclass
class QaRecordEntry:
    record_id: str
    class_label: str | None
    truth_mrr_ms: float | None
    predicted_mrr_ms: float | None
    excluded: bool

    @property
    def abs_err_ms(self) -> float | None:
        if self.excluded:
            return None
        return abs(self.truth_mrr_ms - self.predicted_mrr_ms)


@dataclass
class QaReport:
    """Per-class and overall RR-mean MAE over an annotated corpus."""

    entries: list[QaRecordEntry]
    per_class: dict[str, tuple[int, float]] = field(init=False)
    overall_mae_ms: float = field(init=False)
    n_records: int = field(init=False)
    n_excluded: int = field(init=False)

    def __post_init__(self):
        used = [e for e in self.entries if not e.excluded]
        self.n_records = len(used)
        self.n_excluded = len(self.entries) - len(used)
        if not used:
            raise UndefinedResultError("every record was excluded; MAE undefined")
        by_class: dict[str, list[float]] = {}
        for e in used:
            by_class.setdefault(e.class_label or "unlabeled", []).append(e.abs_err_ms)
        self.per_class = {
            c: (len(v), float(np.mean(v))) for c, v in sorted(by_class.items())
        }
        self.overall_mae_ms = float(np.mean([e.abs_err_ms for e in used]))

    def to_json(self) -> str:
        doc = {
            "schema": "diecg-qa-report/1",
            "n_records": self.n_records,
            "n_excluded": self.n_excluded,
            "overall_mae_ms": round(self.overall_mae_ms, 4),
            "per_class": {
                c: {"n_records": n, "mae_ms": round(m, 4)}
                for c, (n, m) in self.per_class.items()
            },
            "records": [
                {
                    "record_id": e.record_id,
                    "class_label": e.class_label,
                    "truth_mrr_ms": None if e.truth_mrr_ms is None else round(e.truth_mrr_ms, 4),
                    "predicted_mrr_ms": None
                    if e.predicted_mrr_ms is None
                    else round(e.predicted_mrr_ms, 4),
                    "excluded": e.excluded,
                }
                for e in sorted(self.entries, key=lambda e: e.record_id)
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        width = max(len("overall"), *(len(c) for c in self.per_class))
        lines = [f"{'class':<{width}}  {'records':>7}  {'MAE (ms)':>9}"]
        for c, (n, m) in self.per_class.items():
            lines.append(f"{c:<{width}}  {n:>7d}  {m:>9.2f}")
        lines.append(f"{'overall':<{width}}  {self.n_records:>7d}  {self.overall_mae_ms:>9.2f}")
        if self.n_excluded:
            lines.append(f"excluded: {self.n_excluded} record(s) with fewer than 2 peaks")
        return "\n".join(lines)


def build_qa_report(
    records: list[EcgRecord], annotations: dict[str, RPeakSet]
) -> QaReport:
    """Compare detected RR means against annotated ones record by record.

    Records without an annotation are ignored; zero overlap is an
    alignment error. A record where either side has fewer than two peaks
    is excluded from the averages and counted.
    """
    matched = [r for r in records if r.record_id in annotations]
    if not matched:
        raise AlignmentError("no record ids overlap between records and annotations")
    entries: list[QaRecordEntry] = []
    for rec in matched:
        sig = rec.leads[QA_LEAD]
        truth = annotations[rec.record_id]
        pred = detect_r_peaks(sig, record_id=rec.record_id)
        truth_ok = truth.peaks.size >= 2
        pred_ok = pred.peaks.size >= 2
        entries.append(
            QaRecordEntry(
                record_id=rec.record_id,
                class_label=rec.class_label,
                truth_mrr_ms=rr_mean_ms(truth, sig.fs) if truth_ok else None,
                predicted_mrr_ms=rr_mean_ms(pred, sig.fs) if pred_ok else None,
                excluded=not (truth_ok and pred_ok),
            )
        )
    return QaReport(entries=entries)


def write_annotations(annotations: list[RPeakSet], path: str | Path) -> Path:
    path = Path(path)
    doc = {
        "schema": RPEAKS_SCHEMA,
        "annotations": [
            {"record_id": a.record_id, "lead": a.lead, "peaks": [int(p) for p in a.peaks]}
            for a in sorted(annotations, key=lambda a: a.record_id)
        ],
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
    return path


def read_annotations(path: str | Path) -> dict[str, RPeakSet]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RecordSchemaError(f"{path.name}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("schema") != RPEAKS_SCHEMA:
        raise RecordSchemaError(f"{path.name}: expected schema {RPEAKS_SCHEMA!r}")
    rows = doc.get("annotations")
    if not isinstance(rows, list):
        raise RecordSchemaError(f"{path.name}: annotations: must be an array")
    out: dict[str, RPeakSet] = {}
    for i, row in enumerate(rows):
        where = f"{path.name}: annotations[{i}]"
        if not isinstance(row, dict) or not isinstance(row.get("record_id"), str):
            raise RecordSchemaError(f"{where}: needs a record_id string")
        if not isinstance(row.get("peaks"), list):
            raise RecordSchemaError(f"{where}: needs a peaks array")
        try:
            rp = RPeakSet(
                record_id=row["record_id"],
                peaks=np.asarray(row["peaks"], dtype=np.int64),
                lead=row.get("lead", QA_LEAD),
            )
        except (ValueError, TypeError) as exc:
            raise RecordSchemaError(f"{where}: {exc}") from exc
        if rp.record_id in out:
            raise RecordSchemaError(f"{where}: duplicate record_id {rp.record_id!r}")
        out[rp.record_id] = rp
    return out
