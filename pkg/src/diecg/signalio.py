"""Record file format, CSV export, lead concatenation.

A record file (schema ``diecg-record/1``) is JSON holding the 12 leads
at 200 Hz in canonical order plus provenance. Samples are written as
fixed 6-decimal numbers; reading and re-writing a record reproduces the
file byte for byte, which batch reruns rely on.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibrate import EcgSignal, TARGET_FS
from .errors import RecordSchemaError
from .layout import STANDARD_LEADS

__all__ = [
    "RECORD_SCHEMA",
    "CLASS_NAMES",
    "EcgRecord",
    "ConcatSequence",
    "write_record",
    "read_record",
    "record_to_json",
    "export_csv",
    "concat_leads",
    "atomic_write_text",
]

RECORD_SCHEMA = "diecg-record/1"

# study class vocabulary; records may carry any label or none
CLASS_NAMES = ("COVID-19", "MI", "Normal", "Abnormal", "RMI")

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass
class EcgRecord:
    """A digitized 12-lead ECG at 200 Hz."""

    record_id: str
    leads: dict[str, EcgSignal]
    class_label: str | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not _ID_RE.match(self.record_id):
            raise RecordSchemaError(f"record_id {self.record_id!r} is not filesystem-safe")
        missing = [n for n in STANDARD_LEADS if n not in self.leads]
        extra = [n for n in self.leads if n not in STANDARD_LEADS]
        if missing or extra:
            raise RecordSchemaError(
                f"record {self.record_id}: leads missing={missing} unexpected={extra}"
            )
        # canonical order regardless of how the dict was assembled
        self.leads = {n: self.leads[n] for n in STANDARD_LEADS}
        for name, sig in self.leads.items():
            if sig.fs != TARGET_FS:
                raise RecordSchemaError(
                    f"record {self.record_id}: lead {name} is at {sig.fs} Hz, expected {TARGET_FS}"
                )


@dataclass
class ConcatSequence:
    """Fixed-length per-lead matrix for the classification hand-off.

    samples has shape (12, t_lead): each lead truncated or zero-padded
    to exactly t_lead samples, canonical lead order.
    """

    samples: np.ndarray
    t_lead: int
    record_id: str
    class_label: str | None = None

    @property
    def flat(self) -> np.ndarray:
        """Leads joined end to end: length 12 * t_lead."""
        return self.samples.reshape(-1)


def concat_leads(rec: EcgRecord, t_lead: int = 500) -> ConcatSequence:
    """Truncate or zero-pad each lead to t_lead samples and stack them."""
    if t_lead < 1:
        raise ValueError("t_lead must be >= 1")
    out = np.zeros((len(STANDARD_LEADS), t_lead), dtype=np.float64)
    for i, name in enumerate(STANDARD_LEADS):
        s = rec.leads[name].samples[:t_lead]
        out[i, : s.size] = s
    return ConcatSequence(
        samples=out, t_lead=t_lead, record_id=rec.record_id, class_label=rec.class_label
    )


def _fmt_samples(samples: np.ndarray) -> str:
    return "[" + ", ".join(f"{x:.6f}" for x in samples) + "]"


def record_to_json(rec: EcgRecord) -> str:
    """Serialize a record to its canonical byte-stable JSON text."""
    try:
        prov = json.dumps(rec.provenance, sort_keys=True, allow_nan=False)
    except (TypeError, ValueError) as exc:
        raise RecordSchemaError(f"provenance is not plain JSON data: {exc}") from exc
    lines = [
        "{",
        f'  "schema": {json.dumps(RECORD_SCHEMA)},',
        f'  "record_id": {json.dumps(rec.record_id)},',
        '  "fs_hz": 200,',
        f'  "class_label": {json.dumps(rec.class_label)},',
        f'  "provenance": {prov},',
        '  "leads": {',
    ]
    for i, name in enumerate(STANDARD_LEADS):
        comma = "," if i < len(STANDARD_LEADS) - 1 else ""
        lines.append(f"    {json.dumps(name)}: {_fmt_samples(rec.leads[name].samples)}{comma}")
    lines += ["  }", "}", ""]
    return "\n".join(lines)


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see halves."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_record(rec: EcgRecord, out_dir: str | Path) -> Path:
    """Write ``<record_id>.json`` into out_dir and return its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{rec.record_id}.json"
    atomic_write_text(path, record_to_json(rec))
    return path


def _expect(cond: bool, where: str, what: str):
    if not cond:
        raise RecordSchemaError(f"{where}: {what}")


def read_record(path: str | Path) -> EcgRecord:
    """Parse and validate a record file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RecordSchemaError(f"{path.name}: not valid JSON ({exc})") from exc
    where = path.name
    _expect(isinstance(doc, dict), where, "top level must be an object")
    _expect(doc.get("schema") == RECORD_SCHEMA, where, f"schema: expected {RECORD_SCHEMA!r}")
    rid = doc.get("record_id")
    _expect(isinstance(rid, str), where, "record_id: must be a string")
    fs = doc.get("fs_hz")
    _expect(isinstance(fs, (int, float)) and fs == TARGET_FS, where, "fs_hz: must be 200")
    label = doc.get("class_label")
    _expect(label is None or isinstance(label, str), where, "class_label: string or null")
    prov = doc.get("provenance", {})
    _expect(isinstance(prov, dict), where, "provenance: must be an object")
    leads_doc = doc.get("leads")
    _expect(isinstance(leads_doc, dict), where, "leads: must be an object")
    leads: dict[str, EcgSignal] = {}
    for name in STANDARD_LEADS:
        arr = leads_doc.get(name)
        _expect(isinstance(arr, list) and len(arr) > 0, where, f"leads.{name}: non-empty array")
        vals = np.asarray(arr, dtype=np.float64)
        _expect(bool(np.all(np.isfinite(vals))), where, f"leads.{name}: samples must be finite")
        leads[name] = EcgSignal(samples=vals, fs=TARGET_FS, lead_name=name)
    extra = set(leads_doc) - set(STANDARD_LEADS)
    _expect(not extra, where, f"leads: unexpected entries {sorted(extra)}")
    return EcgRecord(record_id=rid, leads=leads, class_label=label, provenance=prov)


def export_csv(rec: EcgRecord, path: str | Path) -> Path:
    """Write the record as CSV: a time column plus one column per lead.

    Rows run to the longest lead; shorter leads leave trailing cells
    empty. All numbers use fixed 6-decimal formatting.
    """
    path = Path(path)
    n = max(sig.samples.size for sig in rec.leads.values())
    lines = ["time_s," + ",".join(STANDARD_LEADS)]
    cols = [rec.leads[name].samples for name in STANDARD_LEADS]
    for k in range(n):
        cells = [f"{k / TARGET_FS:.6f}"]
        for s in cols:
            cells.append(f"{s[k]:.6f}" if k < s.size else "")
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path
