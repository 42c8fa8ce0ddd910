"""Source manifest loading, document fetching and readable/scanned triage.

The manifest is a UTF-8 comma-separated table with the fixed header
`id,parliament,period,locator,format_hint,script_hint,scan_quality_hint`;
it replaces the per-parliament download scripts with one declarative
registry.
"""

from __future__ import annotations

import csv
import logging
import shutil
import time
from dataclasses import dataclass, replace
from pathlib import Path
from urllib.parse import urlparse
from urllib.request import url2pathname

from . import pdfio

log = logging.getLogger(__name__)

MANIFEST_HEADER = (
    "id",
    "parliament",
    "period",
    "locator",
    "format_hint",
    "script_hint",
    "scan_quality_hint",
)

FORMAT_HINTS = ("readable", "scanned", "unknown")
SCRIPT_HINTS = ("antiqua", "fraktur", "unknown")
QUALITY_HINTS = ("good", "poor", "unknown")

STATES = ("fetched", "classified", "imaged", "extracted", "annotated", "packaged")

READABLE_CHARS_PER_PAGE = 50


class ManifestError(Exception):
    """Manifest cannot be parsed or violates an invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ClassificationError(Exception):
    """PDF could not be classified (unreadable or corrupt)."""

    def __init__(self, document_id: str, cause: str):
        self.document_id = document_id
        super().__init__(f"{document_id}: {cause}")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    parliament: str
    period_label: str
    locator: str
    format_hint: str = "unknown"
    script_hint: str = "unknown"
    scan_quality_hint: str = "unknown"


@dataclass(frozen=True)
class SourceManifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class DocumentRecord:
    """One protocol's lifecycle state as it moves through the pipeline."""

    id: str
    parliament: str
    local_path: Path
    state: str = "fetched"
    classification: str | None = None  # readable | scanned
    script: str = "antiqua"
    page_count: int = 0
    provenance: str | None = None  # native_text | ocr

    def advance(self, state: str, **changes) -> "DocumentRecord":
        """Return a new record in `state`; transitions must be monotone."""
        if STATES.index(state) < STATES.index(self.state):
            raise ValueError(
                f"{self.id}: state may not move backwards ({self.state} -> {state})"
            )
        return replace(self, state=state, **changes)


@dataclass(frozen=True)
class FetchFailure:
    entry_id: str
    reason: str


@dataclass(frozen=True)
class FetchResult:
    records: tuple[DocumentRecord, ...]
    failures: tuple[FetchFailure, ...]


def _validated_hint(value: str, allowed: tuple[str, ...], column: str, line: int) -> str:
    value = value.strip()
    if not value:
        return "unknown"
    if value not in allowed:
        raise ManifestError(
            f"{column} must be one of {'|'.join(allowed)}, got {value!r}", line
        )
    return value


def load_manifest(path) -> SourceManifest:
    """Load and validate a manifest file; missing hints become `unknown`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc}")
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ManifestError("empty file, expected header row", 1)
    header = tuple(cell.strip() for cell in rows[0])
    if header != MANIFEST_HEADER:
        raise ManifestError(
            f"bad header {','.join(header)!r}, expected {','.join(MANIFEST_HEADER)!r}", 1
        )
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 4 or len(row) > 7:
            raise ManifestError(f"expected 4..7 fields, got {len(row)}", lineno)
        row = [cell.strip() for cell in row] + [""] * (7 - len(row))
        entry_id, parliament, period, locator = row[:4]
        if not entry_id:
            raise ManifestError("empty id", lineno)
        if not parliament:
            raise ManifestError(f"entry {entry_id!r}: empty parliament", lineno)
        if not locator:
            raise ManifestError(f"entry {entry_id!r}: empty locator", lineno)
        if entry_id in seen:
            raise ManifestError(
                f"duplicate id {entry_id!r} (first on line {seen[entry_id]})", lineno
            )
        seen[entry_id] = lineno
        entries.append(
            ManifestEntry(
                id=entry_id,
                parliament=parliament,
                period_label=period,
                locator=locator,
                format_hint=_validated_hint(row[4], FORMAT_HINTS, "format_hint", lineno),
                script_hint=_validated_hint(row[5], SCRIPT_HINTS, "script_hint", lineno),
                scan_quality_hint=_validated_hint(
                    row[6], QUALITY_HINTS, "scan_quality_hint", lineno
                ),
            )
        )
    return SourceManifest(entries=tuple(entries))


def write_manifest(manifest: SourceManifest, path) -> Path:
    """Write a manifest back out; load_manifest(write_manifest(m)) == m."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for e in manifest:
            writer.writerow(
                [e.id, e.parliament, e.period_label, e.locator,
                 e.format_hint, e.script_hint, e.scan_quality_hint]
            )
    return path


def store_path_for(entry: ManifestEntry, store: Path) -> Path:
    return Path(store) / entry.parliament / f"{entry.id}.pdf"


def _locator_bytes(locator: str, delay: float) -> bytes:
    parsed = urlparse(locator)
    if parsed.scheme in ("http", "https"):
        import requests

        if delay > 0:
            time.sleep(delay)
        resp = requests.get(locator, timeout=60)
        resp.raise_for_status()
        return resp.content
    if parsed.scheme == "file":
        source = Path(url2pathname(parsed.path))
    else:
        source = Path(locator)
    return source.read_bytes()


def fetch_documents(manifest: SourceManifest, store, delay: float = 0.0) -> FetchResult:
    """Fetch every manifest entry into `store/<parliament>/<id>.pdf`.

    Already-present files are kept as-is (idempotent); per-entry failures are
    collected and the batch continues.
    """
    store = Path(store)
    store.mkdir(parents=True, exist_ok=True)
    records: list[DocumentRecord] = []
    failures: list[FetchFailure] = []
    for entry in manifest:
        dest = store_path_for(entry, store)
        try:
            if not dest.exists():
                data = _locator_bytes(entry.locator, delay)
                dest.parent.mkdir(parents=True, exist_ok=True)
                tmp = dest.with_suffix(".pdf.part")
                tmp.write_bytes(data)
                tmp.replace(dest)
        except Exception as exc:
            log.warning("fetch failed for %s: %s", entry.id, exc)
            failures.append(FetchFailure(entry.id, str(exc)))
            continue
        records.append(
            DocumentRecord(
                id=entry.id,
                parliament=entry.parliament,
                local_path=dest,
                state="fetched",
                script="fraktur" if entry.script_hint == "fraktur" else "antiqua",
            )
        )
    return FetchResult(tuple(records), tuple(failures))


def classify_document(
    record: DocumentRecord,
    format_hint: str = "unknown",
    threshold: int = READABLE_CHARS_PER_PAGE,
) -> DocumentRecord:
    """Set classification by average extractable characters per page.

    A manifest format_hint other than `unknown` overrides the heuristic
    (some scanned PDFs carry junk text layers).
    """
    if record.state != "fetched":
        raise ValueError(f"{record.id}: classify requires state=fetched, got {record.state}")
    try:
        texts = pdfio.page_texts(record.local_path)
    except (pdfio.PdfError, OSError) as exc:
        raise ClassificationError(record.id, str(exc)) from exc
    page_count = len(texts)
    if format_hint != "unknown":
        classification = format_hint
    else:
        chars = sum(len("".join(t.split())) for t in texts)
        classification = "readable" if chars / page_count >= threshold else "scanned"
    return record.advance(
        "classified",
        classification=classification,
        page_count=page_count,
        provenance="native_text" if classification == "readable" else "ocr",
    )
