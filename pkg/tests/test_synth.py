"""Synthetic printout rendering: determinism, truth sidecars, degradation."""

from __future__ import annotations

import json

import numpy as np
import pytest

from diecg.errors import RenderError
from diecg.layout import bundled_template
from diecg.raster import GrayImage
from diecg.synth import (
    PAGE_PRESETS,
    SynthSpec,
    generate_corpus,
    load_truth,
    perturb,
    pqrst_from_beats,
    render,
    write_page,
)


def spec_for(tid, **kw):
    base = dict(
        template_id=tid,
        heart_rate_bpm=80.0,
        amplitude_mv=1.0,
        trace_thickness_px=3,
        seed=5,
    )
    base.update(kw)
    return SynthSpec(**base)


# -- spec validation -------------------------------------------------------------


def test_spec_rejects_bad_parameters():
    with pytest.raises(RenderError, match="waveform"):
        spec_for("template1", waveform="sawtooth")
    with pytest.raises(RenderError, match="bpm"):
        spec_for("template1", heart_rate_bpm=10.0)
    with pytest.raises(RenderError, match="thickness"):
        spec_for("template1", trace_thickness_px=0)
    with pytest.raises(RenderError, match="speckle"):
        spec_for("template1", speckle_density=0.5)
    with pytest.raises(RenderError, match="grid"):
        spec_for("template1", grid_intensity=300)


def test_render_unknown_template():
    with pytest.raises(RenderError, match="preset"):
        render(spec_for("template9"))


def test_render_rejects_oversized_amplitude():
    # template1 row spacing is 250 px at 80 px/mV: a 4 mV swing cannot fit
    with pytest.raises(RenderError, match="room"):
        render(spec_for("template1", amplitude_mv=4.0))


# -- waveform synthesis ----------------------------------------------------------


def test_pqrst_beats_peak_at_apex_times():
    t = np.arange(2000) / 200.0
    beats = [2.0, 4.5, 7.0]
    w = pqrst_from_beats(t, beats, r_amp_mv=1.2)
    for bt in beats:
        k = int(round(bt * 200))
        assert np.argmax(w[k - 40 : k + 40]) == 40
    assert w.max() == pytest.approx(1.2, abs=0.01)


def test_pqrst_no_phantom_beats():
    # energy far from every apex stays near zero (no wrap-around tiling)
    t = np.arange(2000) / 200.0
    w = pqrst_from_beats(t, [5.0], r_amp_mv=1.0)
    assert np.abs(w[t < 4.0]).max() < 0.01
    assert np.abs(w[t > 6.0]).max() < 0.01


# -- rendered pages vs truth -----------------------------------------------------


def test_render_is_deterministic():
    a_img, a_truth = render(spec_for("template2", speckle_density=0.001))
    b_img, b_truth = render(spec_for("template2", speckle_density=0.001))
    np.testing.assert_array_equal(a_img.pixels, b_img.pixels)
    assert a_truth == b_truth


def test_page_dimensions_follow_preset(template_ids):
    for tid in template_ids:
        geom = PAGE_PRESETS[tid]
        img, truth = render(spec_for(tid))
        assert img.pixels.shape == (geom.height, geom.width)
        assert truth["page"] == {"width": geom.width, "height": geom.height}
        assert truth["baselines"] == list(geom.baselines)


def test_truth_pulse_dimensions(template_ids):
    for tid in template_ids:
        cfg = bundled_template(tid)
        _, truth = render(spec_for(tid), cfg)
        pps, pxmv = truth["px_per_second"], truth["px_per_mv"]
        assert truth["pulse"]["width_px"] == round(cfg.ref_pulse.width_s * pps)
        assert truth["pulse"]["height_px"] == round(cfg.ref_pulse.height_mv * pxmv)


def test_truth_beat_times_spacing(rendered_pages):
    for tid, (img, truth, cfg) in rendered_pages.items():
        period = 60.0 / truth["heart_rate_bpm"]
        for row in truth["leads"].values():
            times = np.asarray(row["r_peak_times_s"])
            assert times.size >= 2, tid
            assert times.min() >= 0.1
            dur = (row["trace_col1"] - row["trace_col0"]) / truth["px_per_second"]
            assert times.max() <= dur - 0.1
            np.testing.assert_allclose(np.diff(times), period, atol=1e-9)


def test_truth_amplitude_span_matches_trace(rendered_pages):
    for tid, (img, truth, cfg) in rendered_pages.items():
        for row in truth["leads"].values():
            amps = np.asarray(row["amplitudes_mv"])
            assert amps.size == row["trace_col1"] - row["trace_col0"]
            assert amps.max() == pytest.approx(truth["amplitude_mv"], abs=0.02)


# -- degradation -----------------------------------------------------------------


def test_perturb_identity_without_arguments():
    img = GrayImage(np.full((50, 60), 255, dtype=np.uint8))
    out = perturb(img)
    np.testing.assert_array_equal(out.pixels, img.pixels)
    assert out.pixels is not img.pixels


def test_perturb_speckle_count_is_exact():
    img = GrayImage(np.full((100, 200), 255, dtype=np.uint8))
    out = perturb(img, speckle_density=0.002, seed=3)
    assert int((out.pixels == 40).sum()) == round(0.002 * 100 * 200)


def test_perturb_darkens_only_midtones():
    px = np.full((10, 10), 255, dtype=np.uint8)
    px[0, :] = 180  # grid-like mid tone
    px[1, :] = 30  # ink stays ink
    out = perturb(GrayImage(px), grid_intensity=50)
    assert (out.pixels[0] == 50).all()
    assert (out.pixels[1] == 30).all()
    assert (out.pixels[2:] == 255).all()


# -- files -----------------------------------------------------------------------


def test_write_and_load_truth_roundtrip(tmp_path):
    img, truth = render(spec_for("template1"))
    png, sidecar = write_page(img, truth, tmp_path, "page_a")
    assert png.name == "page_a.png" and sidecar.name == "page_a.truth.json"
    assert load_truth(sidecar) == json.loads(json.dumps(truth))


def test_load_truth_rejects_foreign_schema(tmp_path):
    p = tmp_path / "x.truth.json"
    p.write_text(json.dumps({"schema": "other/9"}))
    with pytest.raises(RenderError, match="schema"):
        load_truth(p)


def test_generate_corpus_layout_and_determinism(tmp_path, template_ids):
    m1 = generate_corpus(["template1", "template3"], 3, seed=11, out_dir=tmp_path / "a")
    rows = m1.read_text().splitlines()
    assert rows[0] == "path,template_id,class_label"
    assert len(rows) == 1 + 6
    names = [r.split(",")[0] for r in rows[1:]]
    assert names[0] == "template1_s11_000.png"
    labels = [r.split(",")[2] for r in rows[1:]]
    # labels cycle through the class list across the whole corpus
    assert labels[:5] == ["COVID-19", "MI", "Normal", "Abnormal", "RMI"]
    for name in names:
        assert (tmp_path / "a" / name).exists()
        assert (tmp_path / "a" / name).with_suffix("").with_suffix(".truth.json").exists()

    m2 = generate_corpus(["template1", "template3"], 3, seed=11, out_dir=tmp_path / "b")
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert m1.read_text() == m2.read_text()
