"""Record file format: writing, reading, validation, concatenation, CSV."""

from __future__ import annotations

import json

import numpy as np
import pytest

from diecg.calibrate import EcgSignal
from diecg.errors import RecordSchemaError
from diecg.signalio import (
    CLASS_NAMES,
    RECORD_SCHEMA,
    STANDARD_LEADS,
    EcgRecord,
    concat_leads,
    export_csv,
    read_record,
    record_to_json,
    write_record,
)


def make_record(record_id="rec-001", n=8, label="Normal", lengths=None):
    leads = {}
    for i, name in enumerate(STANDARD_LEADS):
        size = n if lengths is None else lengths[i]
        samples = np.linspace(-0.5, 0.5, size) + 0.01 * i
        leads[name] = EcgSignal(samples=samples, fs=200.0, lead_name=name)
    return EcgRecord(
        record_id=record_id,
        leads=leads,
        class_label=label,
        provenance={"template_id": "template1", "px_per_mv": 80.0},
    )


# -- schema and ordering -------------------------------------------------------


def test_record_reorders_leads_canonically():
    rec = make_record()
    shuffled = dict(reversed(list(rec.leads.items())))
    rec2 = EcgRecord(record_id="x", leads=shuffled)
    assert list(rec2.leads) == list(STANDARD_LEADS)


def test_record_rejects_missing_or_extra_leads():
    rec = make_record()
    leads = dict(rec.leads)
    leads.pop("V6")
    with pytest.raises(RecordSchemaError, match="V6"):
        EcgRecord(record_id="x", leads=leads)
    leads = dict(rec.leads)
    leads["X1"] = leads["I"]
    with pytest.raises(RecordSchemaError, match="X1"):
        EcgRecord(record_id="x", leads=leads)


def test_record_rejects_wrong_rate():
    leads = {n: EcgSignal(np.zeros(4), 100.0, n) for n in STANDARD_LEADS}
    with pytest.raises(RecordSchemaError, match="100"):
        EcgRecord(record_id="x", leads=leads)


def test_record_rejects_unsafe_ids():
    rec = make_record()
    for bad in ("", "a/b", ".hidden", "sp ace"):
        with pytest.raises(RecordSchemaError):
            EcgRecord(record_id=bad, leads=rec.leads)


# -- round trips ----------------------------------------------------------------


def test_write_read_roundtrip(tmp_path):
    rec = make_record()
    path = write_record(rec, tmp_path)
    assert path.name == "rec-001.json"
    again = read_record(path)
    assert again.record_id == rec.record_id
    assert again.class_label == rec.class_label
    assert again.provenance == rec.provenance
    for name in STANDARD_LEADS:
        np.testing.assert_allclose(
            again.leads[name].samples, rec.leads[name].samples, atol=5e-7
        )


def test_rewrite_is_byte_identical(tmp_path):
    rec = make_record()
    p1 = write_record(rec, tmp_path / "a")
    again = read_record(p1)
    p2 = write_record(again, tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()


def test_record_json_layout():
    rec = make_record()
    doc = json.loads(record_to_json(rec))
    assert doc["schema"] == RECORD_SCHEMA
    assert doc["fs_hz"] == 200
    assert list(doc["leads"]) == list(STANDARD_LEADS)
    # samples serialize at fixed 6-decimal precision
    text = record_to_json(rec)
    assert "0.010000" in text or "-0.500000" in text


def test_read_record_error_paths(tmp_path):
    rec = make_record()
    path = write_record(rec, tmp_path)
    doc = json.loads(path.read_text())

    bad = dict(doc, schema="diecg-record/9")
    p = tmp_path / "bad1.json"
    p.write_text(json.dumps(bad))
    with pytest.raises(RecordSchemaError, match="schema"):
        read_record(p)

    bad = dict(doc, fs_hz=500)
    p = tmp_path / "bad2.json"
    p.write_text(json.dumps(bad))
    with pytest.raises(RecordSchemaError, match="fs_hz"):
        read_record(p)

    bad = dict(doc)
    bad["leads"] = {k: v for k, v in doc["leads"].items() if k != "V3"}
    p = tmp_path / "bad3.json"
    p.write_text(json.dumps(bad))
    with pytest.raises(RecordSchemaError, match="leads"):
        read_record(p)

    p = tmp_path / "bad4.json"
    p.write_text("{not json")
    with pytest.raises(RecordSchemaError):
        read_record(p)


def test_atomic_write_leaves_no_tempfiles(tmp_path):
    write_record(make_record(), tmp_path)
    names = [p.name for p in tmp_path.iterdir()]
    assert names == ["rec-001.json"]


# -- concatenation ---------------------------------------------------------------


def test_concat_leads_truncates_and_pads():
    lengths = [450 if i % 2 else 600 for i in range(12)]
    rec = make_record(lengths=lengths)
    seq = concat_leads(rec, t_lead=500)
    assert seq.samples.shape == (12, 500)
    for i, name in enumerate(STANDARD_LEADS):
        src = rec.leads[name].samples
        if lengths[i] >= 500:
            np.testing.assert_array_equal(seq.samples[i], src[:500])
        else:
            np.testing.assert_array_equal(seq.samples[i, : lengths[i]], src)
            assert not seq.samples[i, lengths[i] :].any()
    assert seq.flat.shape == (6000,)
    np.testing.assert_array_equal(seq.flat[:500], seq.samples[0])


def test_concat_leads_metadata_and_validation():
    rec = make_record(label="COVID-19")
    seq = concat_leads(rec, t_lead=8)
    assert seq.record_id == rec.record_id
    assert seq.class_label == "COVID-19"
    with pytest.raises(ValueError):
        concat_leads(rec, t_lead=0)


def test_class_names_match_study():
    assert CLASS_NAMES == ("COVID-19", "MI", "Normal", "Abnormal", "RMI")


# -- CSV export -------------------------------------------------------------------


def test_export_csv_layout(tmp_path):
    rec = make_record(lengths=[4] * 11 + [2])
    path = export_csv(rec, tmp_path / "out.csv")
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "time_s"
    assert header[1:] == list(STANDARD_LEADS)
    assert len(lines) == 1 + 4  # longest lead wins the row count
    last = lines[-1].split(",")
    assert last[-1] == ""  # the short lead runs out of samples
    assert float(last[0]) == pytest.approx(3 / 200.0)
