"""parlagest: batch toolkit for annotated parliamentary protocol corpora."""

from .annotate import (
    AnnotatedDocument,
    Dependency,
    Lemma,
    MorphFeatures,
    NamedEntity,
    PosTag,
    Span,
    Token,
    attach_external_annotations,
    extract_native_text,
    normalize_text,
    segment,
    validate_document,
)
from .images import PageImage, enhance_image, rasterize_pages, split_scan_quality
from .manifest import (
    DocumentRecord,
    ManifestEntry,
    SourceManifest,
    classify_document,
    fetch_documents,
    load_manifest,
    write_manifest,
)
from .metadata import (
    DocumentMetaData,
    SessionMetadata,
    extract_metadata,
    timestamp_for_date,
)
from .ocr import OcrJob, WorkerBudget, compute_worker_budget, run_ocr
from .pipeline import (
    CorpusStats,
    PipelineConfig,
    compute_corpus_stats,
    filter_subcorpus,
    run_pipeline,
)
from .quality import (
    FrequencyDictionary,
    QualityReport,
    aggregate_reports,
    is_checkable,
    score_document,
    spellcheck_token,
)
from .xmi import read_xmi, write_xmi

__version__ = "0.1.0"
