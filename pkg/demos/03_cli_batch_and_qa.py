"""
Command-line batch workflow with an RR-interval quality report
==============================================================

Drives the command line end to end, in process: render a labeled
corpus, digitize it from its manifest, then score the detector's
RR intervals against the renderer's true beat times.

The same three commands work from a shell:

    diecg synth --out pages --count 3 --seed 11
    diecg digitize --manifest pages/manifest.csv --out records
    diecg qa --records records --annotations truth_rpeaks.json

Run from the repository root:

    python3 demos/03_cli_batch_and_qa.py
"""

import tempfile
from pathlib import Path

from diecg import cli
from diecg.quality import read_annotations, write_annotations
from diecg.signalio import read_record
from diecg.synth import load_truth, truth_annotations

with tempfile.TemporaryDirectory() as td:
    pages = Path(td) / "pages"
    records = Path(td) / "records"

    # 1. render a small labeled corpus (3 pages per bundled template)
    rc = cli.main(["synth", "--out", str(pages), "--count", "3", "--seed", "11"])
    assert rc == 0, "synth failed"

    # 2. digitize everything the manifest lists, two workers in parallel
    rc = cli.main(["digitize", "--manifest", str(pages / "manifest.csv"),
                   "--out", str(records), "--workers", "2"])
    assert rc == 0, "digitize failed"

    # 3. turn the truth sidecars into an R-peak annotation file; the truth
    #    beat columns are mapped onto each record's own 200 Hz time axis
    annotations = []
    for sidecar in sorted(pages.glob("*.truth.json")):
        record = read_record(records / (sidecar.name.split(".")[0] + ".json"))
        annotations.append(truth_annotations(record, load_truth(sidecar)))
    ann_path = Path(td) / "truth_rpeaks.json"
    write_annotations(annotations, ann_path)
    print(f"\nwrote {len(read_annotations(ann_path))} truth annotations")

    # 4. quality report: detector peaks vs truth peaks, per class and overall
    rc = cli.main(["qa", "--records", str(records),
                   "--annotations", str(ann_path),
                   "--out", str(Path(td) / "qa_report.json")])
    assert rc == 0, "qa failed"
