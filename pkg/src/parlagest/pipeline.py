"""Pipeline scheduler: stage execution, registry, subcorpora, statistics.

Stages run per document with failure isolation: one bad protocol never
aborts the batch. Between individually-invoked stages, state lives in a
JSON registry under the store directory. Outputs are byte-stable across
reruns of an unchanged manifest.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import annotate, images, manifest, metadata, ocr, quality, xmi

log = logging.getLogger(__name__)

REGISTRY_NAME = "records.json"
SUBCORPUS_FILTERS = ("all", "no_ocr", "ocr_only", "fraktur_only")
STATS_CSV_HEADER = "parliament,sessions,sentences,tokens"


class ConfigurationError(Exception):
    """Bad configuration; aborts before any work (CLI exit code 1)."""


@dataclass(frozen=True)
class PipelineConfig:
    manifest_path: Path
    store_path: Path
    out_path: Path
    dpi: int = 300
    ocr_engine: str = "tesseract"
    ocr_extra_args: tuple[str, ...] = ()
    ocr_strategy: str = "four_core_few_jobs"
    total_threads: int = 4
    dictionary_path: Path | None = None  # None = shipped German list
    keep_images: bool = False
    gzip_output: bool = True
    sidecar_dir: Path | None = None
    fetch_delay: float = 0.0

    def __post_init__(self):
        for name in ("manifest_path", "store_path", "out_path"):
            if not str(getattr(self, name)):
                raise ConfigurationError(f"{name} must be non-empty")
        if self.total_threads < 1:
            raise ConfigurationError("total_threads must be >= 1")
        if self.dpi < 1:
            raise ConfigurationError("dpi must be >= 1")
        if self.ocr_strategy not in ocr.STRATEGIES:
            raise ConfigurationError(f"unknown ocr_strategy {self.ocr_strategy!r}")

    def engine(self) -> ocr.OcrEngineConfig:
        return ocr.OcrEngineConfig(self.ocr_engine, tuple(self.ocr_extra_args))

    def dictionary(self) -> quality.FrequencyDictionary:
        if self.dictionary_path is None:
            return quality.FrequencyDictionary.shipped()
        return quality.FrequencyDictionary.from_file(self.dictionary_path)


@dataclass(frozen=True)
class StageFailure:
    document_id: str
    stage: str
    cause: str


@dataclass
class RunSummary:
    stage_counts: dict[str, int] = field(default_factory=dict)
    failures: list[StageFailure] = field(default_factory=list)
    metadata_missing: list[str] = field(default_factory=list)
    packaged_paths: list[Path] = field(default_factory=list)

    def count(self, stage: str, n: int = 1):
        self.stage_counts[stage] = self.stage_counts.get(stage, 0) + n

    def fail(self, document_id: str, stage: str, cause: str):
        log.warning("%s failed at %s: %s", document_id, stage, cause)
        self.failures.append(StageFailure(document_id, stage, cause))

    def to_json(self) -> dict:
        return {
            "stages": dict(sorted(self.stage_counts.items())),
            "failures": [dataclasses.asdict(f) for f in self.failures],
            "metadata_missing": sorted(self.metadata_missing),
            "packaged": [str(p) for p in sorted(self.packaged_paths)],
        }


# -- registry ---------------------------------------------------------------


def registry_path(store: Path) -> Path:
    return Path(store) / REGISTRY_NAME


def load_registry(store: Path) -> dict[str, dict]:
    path = registry_path(store)
    if not path.exists():
        return {}
    return json.loads(path.read_text("utf-8"))


def save_registry(store: Path, registry: dict[str, dict]) -> None:
    path = registry_path(store)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(registry, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def record_to_registry(record: manifest.DocumentRecord, entry: manifest.ManifestEntry) -> dict:
    return {
        "id": record.id,
        "parliament": record.parliament,
        "local_path": str(record.local_path),
        "state": record.state,
        "classification": record.classification,
        "script": record.script,
        "page_count": record.page_count,
        "provenance": record.provenance,
        "format_hint": entry.format_hint,
        "script_hint": entry.script_hint,
        "scan_quality_hint": entry.scan_quality_hint,
    }


def record_from_registry(row: dict) -> manifest.DocumentRecord:
    return manifest.DocumentRecord(
        id=row["id"],
        parliament=row["parliament"],
        local_path=Path(row["local_path"]),
        state=row["state"],
        classification=row.get("classification"),
        script=row.get("script", "antiqua"),
        page_count=row.get("page_count", 0),
        provenance=row.get("provenance"),
    )


# -- per-document stage helpers ----------------------------------------------


def document_dir(store: Path, record: manifest.DocumentRecord) -> Path:
    return Path(store) / record.parliament


def extract_document_text(
    record: manifest.DocumentRecord,
    config: PipelineConfig,
    scan_quality_hint: str = "unknown",
    executor=None,
    budget: ocr.WorkerBudget | None = None,
) -> tuple[manifest.DocumentRecord, str]:
    """Native extraction for readable documents, rasterize/enhance/OCR for
    scanned ones. Returns the advanced record and the raw page text."""
    if record.classification == "readable":
        text = annotate.extract_native_text(record)
        return record.advance("extracted"), text
    pages = images.rasterize_pages(record, dpi=config.dpi)
    record = record.advance("imaged")
    good, poor = images.split_scan_quality(pages, scan_quality_hint)
    enhanced = [images.enhance_image(p) for p in poor]
    ordered = sorted(good + enhanced, key=lambda p: p.page_index)
    if config.keep_images:
        images.dump_pages_png(
            ordered, document_dir(config.store_path, record) / record.id / "pages"
        )
    job = ocr.OcrJob(
        document_id=record.id,
        pages=tuple(ordered),
        language_model=ocr.language_model_for_script(record.script),
        engine_cores=(budget.engine_cores_per_job if budget else 1),
    )
    text = ocr.run_ocr(job, engine=config.engine(), executor=executor)
    return record.advance("extracted"), text


def build_annotated_document(
    record: manifest.DocumentRecord, raw_text: str
) -> tuple[annotate.AnnotatedDocument, bool]:
    """Normalize, translate page breaks, segment, and extract metadata.

    Returns (document, metadata_missing). Form feeds become newlines before
    segmentation: XML 1.0 cannot carry U+000C in the packaged sofa.
    """
    missing = False
    try:
        meta = metadata.extract_metadata(raw_text, record.id, record.parliament)
    except metadata.MetadataMissingError:
        meta = None
        missing = True
    sofa = annotate.normalize_text(raw_text).replace("\f", "\n")
    sentences, tokens = annotate.segment(sofa)
    doc = annotate.AnnotatedDocument(
        document_id=record.id,
        sofa=sofa,
        sentences=sentences,
        tokens=tokens,
        metadata=meta,
        provenance=record.provenance or "native_text",
        script=record.script,
    )
    return doc, missing


def package_document(
    doc: annotate.AnnotatedDocument,
    record: manifest.DocumentRecord,
    config: PipelineConfig,
) -> Path:
    """Write the document into `<out>/<parliament>/xmi/<legislature>/`."""
    out_root = Path(config.out_path)
    target = out_root / record.parliament / "xmi"
    legislature = metadata.legislature_from_subtitle(
        doc.metadata.subtitle if doc.metadata else ""
    )
    if legislature:
        target = target / legislature
    filename = xmi.output_filename(doc.document_id, config.gzip_output)
    base = out_root.resolve().as_uri() + "/"
    doc_meta = metadata.DocumentMetaData(
        document_title=doc.metadata.title if doc.metadata else "",
        document_id=filename,
        document_uri=(target.resolve() / filename).as_uri(),
        document_base_uri=base,
    )
    return xmi.write_xmi(doc, target, gzip_output=config.gzip_output, doc_meta=doc_meta)


def load_sidecar_payload(config: PipelineConfig, document_id: str) -> dict | None:
    if config.sidecar_dir is None:
        return None
    path = Path(config.sidecar_dir) / f"{document_id}.json"
    if not path.exists():
        return None
    return json.loads(path.read_text("utf-8"))


# -- full pipeline -------------------------------------------------------------


def run_pipeline(config: PipelineConfig) -> RunSummary:
    """fetch -> classify -> (rasterize/enhance/OCR | native extract) ->
    annotate -> package -> quality, with per-document failure isolation."""
    source = manifest.load_manifest(config.manifest_path)
    summary = RunSummary()
    store = Path(config.store_path)
    out_root = Path(config.out_path)
    out_root.mkdir(parents=True, exist_ok=True)

    engine = config.engine()
    if any(e.format_hint == "scanned" for e in source) and not engine.available():
        raise ConfigurationError(
            f"OCR engine {engine.executable!r} not found but the manifest "
            "contains scanned documents"
        )
    dictionary = config.dictionary()

    fetch = manifest.fetch_documents(source, store, delay=config.fetch_delay)
    for failure in fetch.failures:
        summary.fail(failure.entry_id, "fetch", failure.reason)
    summary.count("fetched", len(fetch.records))
    entries = {e.id: e for e in source}
    registry = load_registry(store)

    budget = ocr.compute_worker_budget(config.total_threads, config.ocr_strategy)

    def classify_one(record):
        entry = entries[record.id]
        return manifest.classify_document(record, format_hint=entry.format_hint)

    classified: list[manifest.DocumentRecord] = []
    with ThreadPoolExecutor(max_workers=config.total_threads) as pool:
        futures = {r.id: pool.submit(classify_one, r) for r in fetch.records}
        for rid, future in futures.items():
            try:
                classified.append(future.result())
            except Exception as exc:
                summary.fail(rid, "classify", str(exc))
    summary.count("classified", len(classified))

    # OCR engine processes are bounded by the worker budget: pages of one
    # document fan out over a shared pool of `parallel_jobs` workers.
    extracted: list[tuple[manifest.DocumentRecord, str]] = []
    readable = [r for r in classified if r.classification == "readable"]
    scanned = [r for r in classified if r.classification == "scanned"]
    with ThreadPoolExecutor(max_workers=config.total_threads) as pool:
        futures = {
            r.id: pool.submit(extract_document_text, r, config) for r in readable
        }
        for rid, future in futures.items():
            try:
                extracted.append(future.result())
            except Exception as exc:
                summary.fail(rid, "extract", str(exc))
    if scanned:
        with ThreadPoolExecutor(max_workers=budget.parallel_jobs) as engine_pool:
            for record in scanned:
                hint = entries[record.id].scan_quality_hint
                try:
                    extracted.append(
                        extract_document_text(
                            record, config, hint, executor=engine_pool, budget=budget
                        )
                    )
                except Exception as exc:
                    summary.fail(record.id, "ocr", str(exc))
    summary.count("extracted", len(extracted))

    reports: list[quality.QualityReport] = []
    parliament_of: dict[str, str] = {}

    def finish_one(item):
        record, raw_text = item
        doc_dir = document_dir(store, record)
        doc_dir.mkdir(parents=True, exist_ok=True)
        (doc_dir / f"{record.id}.txt").write_text(raw_text, encoding="utf-8")
        doc, missing = build_annotated_document(record, raw_text)
        (doc_dir / f"{record.id}.sofa.txt").write_text(doc.sofa, encoding="utf-8")
        payload = load_sidecar_payload(config, record.id)
        if payload is not None:
            doc = annotate.attach_external_annotations(doc, payload)
        (doc_dir / f"{record.id}.ann.json").write_text(
            json.dumps(annotate.native_layers_payload(doc), ensure_ascii=False),
            encoding="utf-8",
        )
        record = record.advance("annotated")
        path = package_document(doc, record, config)
        record = record.advance("packaged")
        report = quality.score_document(doc, dictionary)
        return record, doc, missing, path, report

    packaged_records: list[manifest.DocumentRecord] = []
    with ThreadPoolExecutor(max_workers=config.total_threads) as pool:
        futures = {item[0].id: pool.submit(finish_one, item) for item in extracted}
        for rid, future in futures.items():
            try:
                record, doc, missing, path, report = future.result()
            except Exception as exc:
                summary.fail(rid, "package", str(exc))
                continue
            packaged_records.append(record)
            summary.packaged_paths.append(path)
            reports.append(report)
            parliament_of[record.id] = record.parliament
            if missing:
                summary.metadata_missing.append(record.id)
    summary.count("packaged", len(packaged_records))
    summary.count("quality_rows", len(reports))

    reports.sort(key=lambda r: r.key)
    quality.write_reports_csv(reports, out_root / "quality.csv")
    quality.write_reports_csv(
        quality.aggregate_reports(reports, group_of=lambda r: parliament_of[r.key]),
        out_root / "quality_by_parliament.csv",
    )

    for record in sorted(packaged_records, key=lambda r: r.id):
        registry[record.id] = record_to_registry(record, entries[record.id])
    save_registry(store, registry)
    (out_root / "run_summary.json").write_text(
        json.dumps(summary.to_json(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return summary


# -- subcorpora and statistics ---------------------------------------------


def corpus_files(corpus_dir) -> list[Path]:
    corpus_dir = Path(corpus_dir)
    return sorted(
        p for p in corpus_dir.rglob("*")
        if p.is_file() and (p.name.endswith(".xmi") or p.name.endswith(".xmi.gz"))
    )


@dataclass(frozen=True)
class SubcorpusSelection:
    selected: tuple[Path, ...]
    unreadable: tuple[Path, ...]


def filter_subcorpus(corpus_dir, which: str) -> SubcorpusSelection:
    """Select packaged documents by stored provenance and script flags."""
    if which not in SUBCORPUS_FILTERS:
        raise ValueError(f"unknown filter {which!r}, expected one of {SUBCORPUS_FILTERS}")
    selected: list[Path] = []
    unreadable: list[Path] = []
    for path in corpus_files(corpus_dir):
        try:
            facts = xmi.read_document_facts(path)
        except Exception as exc:
            log.warning("unreadable document %s: %s", path, exc)
            unreadable.append(path)
            continue
        keep = (
            which == "all"
            or (which == "no_ocr" and facts["provenance"] == "native_text")
            or (which == "ocr_only" and facts["provenance"] == "ocr")
            or (
                which == "fraktur_only"
                and facts["provenance"] == "ocr"
                and facts["script"] == "fraktur"
            )
        )
        if keep:
            selected.append(path)
    return SubcorpusSelection(tuple(selected), tuple(unreadable))


@dataclass(frozen=True)
class StatsRow:
    parliament: str
    sessions: int
    sentences: int
    tokens: int


@dataclass(frozen=True)
class CorpusStats:
    rows: tuple[StatsRow, ...]
    unreadable: tuple[Path, ...] = ()

    @property
    def total_sessions(self) -> int:
        return sum(r.sessions for r in self.rows)

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [STATS_CSV_HEADER]
        lines += [
            f"{r.parliament},{r.sessions},{r.sentences},{r.tokens}" for r in self.rows
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def format_table(self) -> str:
        header = ("parliament", "sessions", "sentences", "tokens")
        data = [
            (r.parliament, str(r.sessions), str(r.sentences), str(r.tokens))
            for r in self.rows
        ]
        widths = [
            max(len(header[i]), *(len(row[i]) for row in data)) if data else len(header[i])
            for i in range(4)
        ]
        lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
        for row in data:
            lines.append(
                row[0].ljust(widths[0])
                + "  "
                + "  ".join(row[i].rjust(widths[i]) for i in range(1, 4))
            )
        return "\n".join(lines)


def compute_corpus_stats(corpus_dir) -> CorpusStats:
    """Sessions, sentences and tokens per parliament over a packaged corpus.

    The parliament is the first path component under the corpus root
    (`<parliament>/xmi/...`); each packaged file counts as one session.
    """
    corpus_dir = Path(corpus_dir)
    sums: dict[str, list[int]] = {}
    unreadable: list[Path] = []
    for path in corpus_files(corpus_dir):
        rel = path.relative_to(corpus_dir)
        parliament = rel.parts[0] if len(rel.parts) > 1 else "unknown"
        try:
            facts = xmi.read_document_facts(path)
        except Exception as exc:
            log.warning("unreadable document %s: %s", path, exc)
            unreadable.append(path)
            continue
        bucket = sums.setdefault(parliament, [0, 0, 0])
        bucket[0] += 1
        bucket[1] += facts["sentences"]
        bucket[2] += facts["tokens"]
    rows = tuple(
        StatsRow(parliament, *sums[parliament]) for parliament in sorted(sums)
    )
    return CorpusStats(rows, tuple(unreadable))
