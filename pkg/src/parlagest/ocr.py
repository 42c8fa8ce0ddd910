"""External OCR engine driver with thread budgeting.

The engine is an external process speaking the common CLI contract
`<engine> <image> <out-base> -l <model>`; text is read back from
`<out-base>.txt`. Each page is a separate invocation so a single bad page
cannot poison a document.
"""

from __future__ import annotations

import logging
import math
import os
import shutil
import subprocess
import tempfile
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from .images import PageImage

log = logging.getLogger(__name__)

STRATEGIES = ("one_core_many_jobs", "four_core_few_jobs")
LANGUAGE_MODELS = ("deu", "deu_frak")
PAGE_SEPARATOR = "\f"


class EngineMissingError(Exception):
    """OCR engine binary not found; raised before any work starts."""


class OcrError(Exception):
    """Engine failed on one page; engine stderr is attached."""

    def __init__(self, document_id: str, page_index: int, stderr: str):
        self.document_id = document_id
        self.page_index = page_index
        self.stderr = stderr
        super().__init__(f"{document_id} page {page_index}: engine failed: {stderr.strip()}")


@dataclass(frozen=True)
class WorkerBudget:
    total_threads: int
    engine_cores_per_job: int
    parallel_jobs: int


@dataclass(frozen=True)
class OcrEngineConfig:
    executable: str = "tesseract"
    extra_args: tuple[str, ...] = ()

    def available(self) -> bool:
        return shutil.which(self.executable) is not None


@dataclass(frozen=True)
class OcrJob:
    document_id: str
    pages: tuple[PageImage, ...]
    language_model: str  # deu | deu_frak
    engine_cores: int = 1


def language_model_for_script(script: str) -> str:
    """Fraktur documents need the dedicated model, everything else `deu`."""
    return "deu_frak" if script == "fraktur" else "deu"


def compute_worker_budget(total_threads: int, strategy: str) -> WorkerBudget:
    """Split available threads between engine processes and engine cores.

    one_core_many_jobs: one core per engine, one job per thread.
    four_core_few_jobs: four cores per engine, jobs = threads/4 rounded
    half-away-from-zero, clamped at 1.
    """
    if total_threads < 1:
        raise ValueError(f"total_threads must be >= 1, got {total_threads}")
    if strategy == "one_core_many_jobs":
        return WorkerBudget(total_threads, 1, total_threads)
    if strategy == "four_core_few_jobs":
        jobs = max(1, math.floor(total_threads / 4 + 0.5))
        return WorkerBudget(total_threads, 4, jobs)
    raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")


def _recognize_page(
    page: PageImage, job: OcrJob, engine: OcrEngineConfig, workdir: Path
) -> str:
    image_path = workdir / f"{job.document_id}_{page.page_index:04d}.png"
    Image.fromarray(page.pixels).save(image_path)
    out_base = workdir / f"{job.document_id}_{page.page_index:04d}"
    cmd = [
        engine.executable,
        str(image_path),
        str(out_base),
        "-l",
        job.language_model,
        *engine.extra_args,
    ]
    env = dict(os.environ)
    env["OMP_THREAD_LIMIT"] = str(job.engine_cores)
    proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
    image_path.unlink(missing_ok=True)
    if proc.returncode != 0:
        raise OcrError(job.document_id, page.page_index, proc.stderr or proc.stdout)
    out_file = Path(f"{out_base}.txt")
    if not out_file.exists():
        raise OcrError(job.document_id, page.page_index, "engine produced no output file")
    text = out_file.read_text(encoding="utf-8")
    out_file.unlink(missing_ok=True)
    return text.strip("\f\n\r ")


def run_ocr(
    job: OcrJob,
    engine: OcrEngineConfig = OcrEngineConfig(),
    workers: int = 1,
    executor: Executor | None = None,
) -> str:
    """OCR every page of the job; page texts joined with form-feeds.

    Page order is preserved and empty pages stay as empty strings. A shared
    `executor` may be passed to bound engine processes across documents.
    """
    if job.language_model not in LANGUAGE_MODELS:
        raise ValueError(f"unknown language model {job.language_model!r}")
    if not job.pages:
        return ""
    for page in job.pages:
        if page.document_id != job.document_id:
            raise ValueError(
                f"page {page.page_index} belongs to {page.document_id}, "
                f"not {job.document_id}"
            )
    if not engine.available():
        raise EngineMissingError(
            f"OCR engine {engine.executable!r} not found on PATH"
        )
    with tempfile.TemporaryDirectory(prefix="parlagest_ocr_") as tmp:
        workdir = Path(tmp)

        def work(page: PageImage) -> tuple[int, str]:
            return page.page_index, _recognize_page(page, job, engine, workdir)

        if executor is not None:
            results = list(executor.map(work, job.pages))
        elif workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(work, job.pages))
        else:
            results = [work(page) for page in job.pages]
    by_index = dict(results)
    return PAGE_SEPARATOR.join(by_index[p.page_index] for p in job.pages)
