"""Command line front end.

Subcommands:
  digitize   printout images -> record files
  qa         RR-interval quality report over a record directory
  synth      render synthetic printouts with truth sidecars

Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
batch partially failed (some pages digitized, some did not).
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from ._version import __version__
from .errors import DigitizationError, RecordSchemaError
from .layout import TemplateConfig, bundled_template, bundled_template_ids, load_template
from .pipeline import DigitizeOptions, digitize_image
from .quality import build_qa_report, detect_r_peaks, read_annotations, write_annotations
from .signalio import export_csv, read_record, write_record
from .synth import SynthSpec, generate_corpus, render, write_page

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; 2 is reserved for
    # partial batch failure here, so usage errors exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diecg", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"diecg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("digitize", help="digitize printout images into record files")
    d.add_argument("images", nargs="*", type=Path, help="printout image files (PNG/JPEG)")
    d.add_argument("--manifest", type=Path, help="CSV with path,template_id,class_label rows")
    d.add_argument("--template", help="template id or YAML path (required without a manifest)")
    d.add_argument("--out", type=Path, required=True, help="output directory for records")
    d.add_argument("--margin-l", type=int, default=None, help="crop margin L in pixels")
    d.add_argument("--band-n", type=int, default=None, help="tracking band half-width N in pixels")
    d.add_argument("--t-lead", type=int, default=None, help="store each lead at exactly this many samples")
    d.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    d.add_argument("--format", choices=("record", "csv"), default="record", help="output file format")
    d.add_argument("--debug-dir", type=Path, default=None, help="dump intermediate masks here")

    q = sub.add_parser("qa", help="RR-interval quality report for digitized records")
    q.add_argument("--records", type=Path, required=True, help="directory of record files")
    q.add_argument("--annotations", type=Path, help="R-peak annotation JSON")
    q.add_argument(
        "--self-detect",
        action="store_true",
        help="use the detector's own peaks as annotations (writes them next to the report)",
    )
    q.add_argument("--out", type=Path, default=None, help="report JSON path (default: <records>/qa_report.json)")

    s = sub.add_parser("synth", help="render synthetic printouts with truth sidecars")
    s.add_argument("--out", type=Path, required=True, help="output directory")
    s.add_argument(
        "--preset",
        default="all",
        help="bundled template id or 'all' (default)",
    )
    s.add_argument("--count", type=int, default=5, help="pages per template")
    s.add_argument("--seed", type=int, default=0, help="corpus seed")
    s.add_argument("--spec", type=Path, default=None, help="render a single page from a YAML spec instead")
    return p


def _resolve_template(value: str) -> TemplateConfig:
    if value in bundled_template_ids():
        return bundled_template(value)
    path = Path(value)
    if path.is_file():
        return load_template(path)
    raise DigitizationError(
        f"--template {value!r} is neither a bundled id ({', '.join(bundled_template_ids())}) nor a file"
    )


def _read_manifest(path: Path) -> list[tuple[Path, str, str | None]]:
    if not path.is_file():
        raise DigitizationError(f"manifest {path} does not exist")
    rows: list[tuple[Path, str, str | None]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"path", "template_id"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise DigitizationError(
                f"manifest needs columns path,template_id[,class_label]; got {reader.fieldnames}"
            )
        for row in reader:
            img = Path(row["path"])
            if not img.is_absolute():
                img = path.parent / img
            label = (row.get("class_label") or "").strip() or None
            rows.append((img, row["template_id"].strip(), label))
    if not rows:
        raise DigitizationError(f"manifest {path} has no data rows")
    return rows


def _digitize_one(job) -> tuple[int, str, str | None, str | None, str | None]:
    """Worker: returns (index, record_id, out_path, stage, message)."""
    idx, img_path, cfg, label, opts, out_dir, fmt = job
    try:
        result = digitize_image(img_path, cfg, class_label=label, options=opts)
        if fmt == "csv":
            out = export_csv(result.record, Path(out_dir) / f"{result.record.record_id}.csv")
        else:
            out = write_record(result.record, out_dir)
        return idx, result.record.record_id, str(out), None, None
    except DigitizationError as exc:
        return idx, Path(img_path).stem, None, exc.stage, str(exc)


def cmd_digitize(args) -> int:
    if args.manifest is not None and args.images:
        print("digitize: use positional images or --manifest, not both", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.manifest is not None:
            manifest_rows = _read_manifest(args.manifest)
            templates: dict[str, TemplateConfig] = {}
            jobs = []
            for img, tid, label in manifest_rows:
                if tid not in templates:
                    templates[tid] = _resolve_template(tid)
                jobs.append((img, templates[tid], label))
        else:
            if not args.images:
                print("digitize: no input images given", file=sys.stderr)
                return EXIT_USAGE
            if args.template is None:
                print("digitize: --template is required without a manifest", file=sys.stderr)
                return EXIT_USAGE
            cfg = _resolve_template(args.template)
            jobs = [(img, cfg, None) for img in args.images]
    except DigitizationError as exc:
        print(f"digitize: {exc}", file=sys.stderr)
        return EXIT_USAGE

    ids = [img.stem for img, _, _ in jobs]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        print(f"digitize: duplicate record ids in inputs: {sorted(dupes)}", file=sys.stderr)
        return EXIT_USAGE

    opts = DigitizeOptions(
        margin_l_px=args.margin_l,
        band_n_px=args.band_n,
        t_lead=args.t_lead,
        debug_dir=args.debug_dir,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    payload = [
        (i, str(img), cfg, label, opts, str(args.out), args.format)
        for i, (img, cfg, label) in enumerate(jobs)
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_digitize_one, payload))
    else:
        results = [_digitize_one(job) for job in payload]

    results.sort(key=lambda r: r[0])
    failures = 0
    for _, record_id, out, stage, msg in results:
        if out is not None:
            print(f"ok {record_id} -> {out}")
        else:
            failures += 1
            print(f"FAIL [{stage}] {record_id}: {msg}", file=sys.stderr)
    print(f"digitized {len(results) - failures}/{len(results)} page(s) -> {args.out}")
    return EXIT_OK if failures == 0 else EXIT_PARTIAL


def cmd_qa(args) -> int:
    if args.annotations is None and not args.self_detect:
        print("qa: need --annotations FILE or --self-detect", file=sys.stderr)
        return EXIT_USAGE
    if args.annotations is not None and args.self_detect:
        print("qa: --annotations and --self-detect are mutually exclusive", file=sys.stderr)
        return EXIT_USAGE
    if not args.records.is_dir():
        print(f"qa: {args.records} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    report_path = args.out or (args.records / "qa_report.json")
    records = []
    for path in sorted(args.records.glob("*.json")):
        if path == report_path:
            continue
        try:
            records.append(read_record(path))
        except RecordSchemaError:
            continue  # directories may hold reports or annotations too
    if not records:
        print(f"qa: no readable records in {args.records}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.self_detect:
            detections = [detect_r_peaks(r.leads["II"], record_id=r.record_id) for r in records]
            ann_path = report_path.with_name("rpeaks_selfdetect.json")
            write_annotations(detections, ann_path)
            print(f"self-detected annotations -> {ann_path}")
            annotations = {a.record_id: a for a in detections}
        else:
            annotations = read_annotations(args.annotations)
        report = build_qa_report(records, annotations)
    except DigitizationError as exc:
        print(f"qa: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report_path.write_text(report.to_json(), encoding="utf-8")
    print(report.format_table())
    print(f"report -> {report_path}")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        if args.spec is not None:
            with open(args.spec, "r", encoding="utf-8") as fh:
                doc = yaml.safe_load(fh) or {}
            if not isinstance(doc, dict):
                raise DigitizationError(f"{args.spec}: spec must be a mapping")
            try:
                spec = SynthSpec(**doc)
            except TypeError as exc:
                raise DigitizationError(f"{args.spec}: {exc}") from None
            img, truth = render(spec)
            png, sidecar = write_page(img, truth, args.out, args.spec.stem)
            print(f"rendered {png} (+ {sidecar.name})")
            return EXIT_OK
        ids = bundled_template_ids() if args.preset == "all" else [args.preset]
        unknown = [t for t in ids if t not in bundled_template_ids()]
        if unknown:
            raise DigitizationError(f"unknown preset(s) {unknown}; bundled: {bundled_template_ids()}")
        if args.count < 1:
            raise DigitizationError("--count must be >= 1")
        manifest = generate_corpus(ids, args.count, args.seed, args.out)
        print(f"rendered {len(ids) * args.count} page(s); manifest -> {manifest}")
        return EXIT_OK
    except DigitizationError as exc:
        print(f"synth: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"digitize": cmd_digitize, "qa": cmd_qa, "synth": cmd_synth}
    return handlers[args.command](args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
