"""Shared fixtures: rendered sample pages and the acceptance summary hook."""

from __future__ import annotations

import numpy as np
import pytest

from diecg.layout import bundled_template, bundled_template_ids
from diecg.synth import SynthSpec, render

# one line per acceptance criterion, printed at the end of the run so the
# pass/fail verdicts survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def template_ids():
    return bundled_template_ids()


@pytest.fixture(scope="session")
def rendered_pages():
    """One deterministic pqrst page per bundled template: (image, truth, cfg)."""
    pages = {}
    for tid in bundled_template_ids():
        cfg = bundled_template(tid)
        spec = SynthSpec(
            template_id=tid,
            heart_rate_bpm=80.0,
            amplitude_mv=1.1,
            trace_thickness_px=3,
            seed=42,
        )
        img, truth = render(spec)
        pages[tid] = (img, truth, cfg)
    return pages


@pytest.fixture(scope="session")
def flat_pages():
    """Flat-line pages: every trace exactly on its baseline."""
    pages = {}
    for tid in bundled_template_ids():
        cfg = bundled_template(tid)
        img, truth = render(SynthSpec(template_id=tid, waveform="flat", seed=7))
        pages[tid] = (img, truth, cfg)
    return pages


@pytest.fixture(scope="session")
def page_corpus_dir(tmp_path_factory):
    """A small on-disk corpus (2 pages per template) with manifest."""
    from diecg.synth import generate_corpus

    out = tmp_path_factory.mktemp("pages")
    manifest = generate_corpus(bundled_template_ids(), 2, 99, out)
    return manifest.parent


def random_binary_grid(rng: np.random.Generator, max_side: int = 20, p: float = 0.25):
    h = int(rng.integers(2, max_side + 1))
    w = int(rng.integers(2, max_side + 1))
    return rng.random((h, w)) < p


def lead_rmse_mv(record, truth) -> dict[str, float]:
    """Per-lead amplitude RMSE (mV) of a digitized record against its truth.

    The digitized time axis is mapped back onto rendered trace columns
    through the record's own calibration and crop origin, then compared
    with the truth amplitudes by linear interpolation. Columns within one
    pixel of either trace end are skipped: the painted stroke extends
    half a thickness past the endpoints, so truth is undefined there.
    """
    pps = float(record.provenance["px_per_second"])
    out = {}
    for name, sig in record.leads.items():
        row = truth["leads"][name]
        amps = np.asarray(row["amplitudes_mv"], dtype=np.float64)
        crop_col0 = record.provenance["crops"][name][2]
        t = np.arange(sig.samples.size) / sig.fs
        u = crop_col0 + t * pps - row["trace_col0"]
        m = (u >= 1.0) & (u <= amps.size - 2.0)
        ref = np.interp(u[m], np.arange(amps.size), amps)
        out[name] = float(np.sqrt(np.mean((sig.samples[m] - ref) ** 2)))
    return out


def rr_error_ms(record, truth) -> float:
    """|detected mean RR - rendered mean RR| in milliseconds, on lead II."""
    from diecg.quality import detect_r_peaks, rr_mean_ms

    truth_times = np.asarray(truth["leads"]["II"]["r_peak_times_s"], dtype=np.float64)
    true_mrr = float(np.mean(np.diff(truth_times))) * 1000.0
    det = detect_r_peaks(record.leads["II"], record.record_id)
    return abs(rr_mean_ms(det, record.leads["II"].fs) - true_mrr)
