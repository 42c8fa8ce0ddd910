"""Command-line front end: run the whole pipeline or individual stages.

Progress and summaries go to stderr, data outputs to files (subcorpus
lists go to stdout for scripting). Exit codes: 0 success even with
per-document failures, 1 configuration error, 2 manifest error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import annotate, manifest, ocr, pipeline, quality

log = logging.getLogger("parlagest")

STAGES = ("run", "fetch", "classify", "ocr", "annotate", "package",
          "quality", "stats", "subcorpus")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parlagest",
        description="Build annotated corpora from parliamentary protocol PDFs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"{name} stage")
        p.add_argument("--manifest", default="manifest.csv", help="source manifest path")
        p.add_argument("--store", default="store", help="document store directory")
        p.add_argument("--out", default="out", help="corpus output directory")
        p.add_argument("--dpi", type=int, default=300)
        p.add_argument("--ocr-engine", default="tesseract")
        p.add_argument("--ocr-strategy", choices=ocr.STRATEGIES,
                       default="four_core_few_jobs")
        p.add_argument("--ocr-extra-args", default="",
                       help="extra engine arguments, whitespace-separated")
        p.add_argument("--threads", type=int, default=4)
        p.add_argument("--dict", dest="dictionary",
                       help="frequency dictionary (default: shipped German list)")
        p.add_argument("--keep-images", action="store_true")
        p.add_argument("--no-gzip", action="store_true")
        p.add_argument("--filter", choices=pipeline.SUBCORPUS_FILTERS, default="all")
        p.add_argument("--sidecar-dir", help="directory of sidecar JSON payloads")
        p.add_argument("--delay", type=float, default=0.0,
                       help="politeness delay between remote fetches, seconds")
    return parser


def config_from_args(args) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig(
        manifest_path=Path(args.manifest),
        store_path=Path(args.store),
        out_path=Path(args.out),
        dpi=args.dpi,
        ocr_engine=args.ocr_engine,
        ocr_extra_args=tuple(args.ocr_extra_args.split()),
        ocr_strategy=args.ocr_strategy,
        total_threads=args.threads,
        dictionary_path=Path(args.dictionary) if args.dictionary else None,
        keep_images=args.keep_images,
        gzip_output=not args.no_gzip,
        sidecar_dir=Path(args.sidecar_dir) if args.sidecar_dir else None,
        fetch_delay=args.delay,
    )


def _print_summary(summary: pipeline.RunSummary) -> None:
    for stage, count in sorted(summary.stage_counts.items()):
        print(f"{stage}: {count}", file=sys.stderr)
    for failure in summary.failures:
        print(f"FAILED {failure.document_id} at {failure.stage}: {failure.cause}",
              file=sys.stderr)
    if summary.metadata_missing:
        print(f"metadata missing (sentinel packaged): "
              f"{', '.join(summary.metadata_missing)}", file=sys.stderr)


def cmd_run(config: pipeline.PipelineConfig) -> int:
    summary = pipeline.run_pipeline(config)
    _print_summary(summary)
    return 0


def cmd_fetch(config: pipeline.PipelineConfig) -> int:
    source = manifest.load_manifest(config.manifest_path)
    result = manifest.fetch_documents(source, config.store_path, delay=config.fetch_delay)
    entries = {e.id: e for e in source}
    registry = pipeline.load_registry(config.store_path)
    for record in result.records:
        registry[record.id] = pipeline.record_to_registry(record, entries[record.id])
    pipeline.save_registry(config.store_path, registry)
    print(f"fetched: {len(result.records)}", file=sys.stderr)
    for failure in result.failures:
        print(f"FAILED {failure.entry_id}: {failure.reason}", file=sys.stderr)
    return 0


def _each_registry_row(config, wanted_states, stage, worker) -> int:
    registry = pipeline.load_registry(config.store_path)
    done = failed = 0
    for rid in sorted(registry):
        row = registry[rid]
        if row["state"] not in wanted_states:
            continue
        record = pipeline.record_from_registry(row)
        try:
            registry[rid] = worker(record, row)
            done += 1
        except Exception as exc:
            log.warning("%s failed at %s: %s", rid, stage, exc)
            print(f"FAILED {rid} at {stage}: {exc}", file=sys.stderr)
            failed += 1
    pipeline.save_registry(config.store_path, registry)
    print(f"{stage}: {done} done, {failed} failed", file=sys.stderr)
    return 0


def cmd_classify(config: pipeline.PipelineConfig) -> int:
    def worker(record, row):
        record = manifest.classify_document(record, format_hint=row.get("format_hint", "unknown"))
        return {**row, **pipeline.record_to_registry(
            record, manifest.ManifestEntry(
                id=row["id"], parliament=row["parliament"], period_label="",
                locator="", format_hint=row.get("format_hint", "unknown"),
                script_hint=row.get("script_hint", "unknown"),
                scan_quality_hint=row.get("scan_quality_hint", "unknown"),
            ))}

    return _each_registry_row(config, ("fetched",), "classify", worker)


def cmd_ocr(config: pipeline.PipelineConfig) -> int:
    engine = config.engine()
    if not engine.available():
        raise pipeline.ConfigurationError(
            f"OCR engine {engine.executable!r} not found on PATH"
        )
    budget = ocr.compute_worker_budget(config.total_threads, config.ocr_strategy)

    def worker(record, row):
        if record.classification != "scanned":
            return row
        record, text = pipeline.extract_document_text(
            record, config, row.get("scan_quality_hint", "unknown"), budget=budget
        )
        doc_dir = pipeline.document_dir(config.store_path, record)
        doc_dir.mkdir(parents=True, exist_ok=True)
        (doc_dir / f"{record.id}.txt").write_text(text, encoding="utf-8")
        return {**row, "state": record.state, "provenance": record.provenance}

    return _each_registry_row(config, ("classified",), "ocr", worker)


def cmd_annotate(config: pipeline.PipelineConfig) -> int:
    def worker(record, row):
        doc_dir = pipeline.document_dir(config.store_path, record)
        doc_dir.mkdir(parents=True, exist_ok=True)
        text_path = doc_dir / f"{record.id}.txt"
        if record.state == "classified":
            if record.classification != "readable":
                return row  # scanned documents go through the ocr stage first
            record, text = pipeline.extract_document_text(record, config)
            text_path.write_text(text, encoding="utf-8")
        else:
            text = text_path.read_text(encoding="utf-8")
        doc, missing = pipeline.build_annotated_document(record, text)
        (doc_dir / f"{record.id}.sofa.txt").write_text(doc.sofa, encoding="utf-8")
        (doc_dir / f"{record.id}.ann.json").write_text(
            json.dumps(annotate.native_layers_payload(doc), ensure_ascii=False),
            encoding="utf-8",
        )
        record = record.advance("annotated")
        return {**row, "state": record.state, "provenance": record.provenance,
                "metadata_missing": missing}

    return _each_registry_row(config, ("classified", "extracted"), "annotate", worker)


def cmd_package(config: pipeline.PipelineConfig) -> int:
    def worker(record, row):
        doc_dir = pipeline.document_dir(config.store_path, record)
        text = (doc_dir / f"{record.id}.txt").read_text(encoding="utf-8")
        doc, _missing = pipeline.build_annotated_document(record, text)
        payload = pipeline.load_sidecar_payload(config, record.id)
        if payload is not None:
            doc = annotate.attach_external_annotations(doc, payload)
        pipeline.package_document(doc, record, config)
        record = record.advance("packaged")
        return {**row, "state": record.state}

    return _each_registry_row(config, ("annotated",), "package", worker)


def cmd_quality(config: pipeline.PipelineConfig) -> int:
    from . import xmi

    dictionary = config.dictionary()
    corpus = Path(config.out_path)
    reports = []
    parliament_of = {}
    for path in pipeline.corpus_files(corpus):
        try:
            doc = xmi.read_xmi(path)
        except Exception as exc:
            print(f"unreadable {path}: {exc}", file=sys.stderr)
            continue
        reports.append(quality.score_document(doc, dictionary))
        rel = path.relative_to(corpus)
        parliament_of[doc.document_id] = rel.parts[0] if len(rel.parts) > 1 else "unknown"
    reports.sort(key=lambda r: r.key)
    quality.write_reports_csv(reports, corpus / "quality.csv")
    quality.write_reports_csv(
        quality.aggregate_reports(reports, group_of=lambda r: parliament_of[r.key]),
        corpus / "quality_by_parliament.csv",
    )
    print(f"quality: {len(reports)} documents scored", file=sys.stderr)
    return 0


def cmd_stats(config: pipeline.PipelineConfig) -> int:
    stats = pipeline.compute_corpus_stats(config.out_path)
    stats.to_csv(Path(config.out_path) / "stats.csv")
    print(stats.format_table(), file=sys.stderr)
    for path in stats.unreadable:
        print(f"unreadable: {path}", file=sys.stderr)
    return 0


def cmd_subcorpus(config: pipeline.PipelineConfig, which: str) -> int:
    selection = pipeline.filter_subcorpus(config.out_path, which)
    for path in selection.selected:
        print(path)
    print(f"subcorpus {which}: {len(selection.selected)} documents, "
          f"{len(selection.unreadable)} unreadable", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "fetch":
            return cmd_fetch(config)
        if args.command == "classify":
            return cmd_classify(config)
        if args.command == "ocr":
            return cmd_ocr(config)
        if args.command == "annotate":
            return cmd_annotate(config)
        if args.command == "package":
            return cmd_package(config)
        if args.command == "quality":
            return cmd_quality(config)
        if args.command == "stats":
            return cmd_stats(config)
        if args.command == "subcorpus":
            return cmd_subcorpus(config, args.filter)
        raise AssertionError(f"unhandled command {args.command}")
    except manifest.ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 2
    except (pipeline.ConfigurationError, ocr.EngineMissingError,
            quality.DictionaryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
