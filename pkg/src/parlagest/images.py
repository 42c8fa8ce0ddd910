"""Page rasterization and the enhancement chain for poor-quality scans.

Scanned protocol PDFs carry one raster per page; rasterization extracts
that raster and scales it to the requested DPI using the page geometry.
Enhancement follows the scan-repair chain: grayscale, 2x upscale, erosion,
dilation, median denoise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from . import pdfio
from .manifest import DocumentRecord

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # broadcast luminosity standard
SCALE_FACTOR = 2
MORPH_KERNEL = np.ones((3, 3), np.uint8)
NOISE_FRACTION_THRESHOLD = 0.002  # isolated dark pixels per page area


class RasterizeError(Exception):
    """Renderer failure on one page; earlier pages are kept on the exception."""

    def __init__(self, document_id: str, page_index: int, cause: str,
                 pages_done: list["PageImage"] | None = None):
        self.document_id = document_id
        self.page_index = page_index
        self.pages_done = pages_done or []
        super().__init__(f"{document_id} page {page_index}: {cause}")


@dataclass(frozen=True)
class PageImage:
    document_id: str
    page_index: int
    pixels: np.ndarray  # uint8; (h, w) gray or (h, w, 3) rgb
    dpi: int
    quality_class: str = "good"  # good | poor

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def channels(self) -> str:
        return "gray" if self.pixels.ndim == 2 else "rgb"

    def __eq__(self, other):
        if not isinstance(other, PageImage):
            return NotImplemented
        return (
            (self.document_id, self.page_index, self.dpi, self.quality_class)
            == (other.document_id, other.page_index, other.dpi, other.quality_class)
            and np.array_equal(self.pixels, other.pixels)
        )


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Luminosity grayscale (0.299/0.587/0.114), uint8 in, uint8 out."""
    if pixels.ndim == 2:
        return pixels
    weights = np.asarray(GRAY_WEIGHTS, dtype=np.float64)
    gray = pixels[..., :3].astype(np.float64) @ weights
    return np.clip(np.round(gray), 0, 255).astype(np.uint8)


def rasterize_pages(record: DocumentRecord, dpi: int = 300) -> list[PageImage]:
    """One image per PDF page, in page order, scaled to `dpi`."""
    if record.classification != "scanned":
        raise ValueError(f"{record.id}: rasterize requires a scanned document")
    if dpi < 1:
        raise ValueError("dpi must be >= 1")
    try:
        doc = pdfio.PdfDocument.from_path(record.local_path)
    except (pdfio.PdfError, OSError) as exc:
        raise RasterizeError(record.id, 0, str(exc))
    pages: list[PageImage] = []
    for page in doc.pages:
        try:
            rasters = page.extract_images()
            if not rasters:
                raise pdfio.PdfError("page has no raster image")
            raster = max(rasters, key=lambda a: a.shape[0] * a.shape[1])
            w_pt, h_pt = page.size_pt
            target_w = max(1, round(w_pt / 72.0 * dpi))
            target_h = max(1, round(h_pt / 72.0 * dpi))
            if (raster.shape[1], raster.shape[0]) != (target_w, target_h):
                raster = cv2.resize(
                    raster, (target_w, target_h), interpolation=cv2.INTER_LINEAR
                )
        except pdfio.PdfError as exc:
            raise RasterizeError(record.id, page.index, str(exc), pages)
        pages.append(
            PageImage(
                document_id=record.id,
                page_index=page.index,
                pixels=raster,
                dpi=dpi,
            )
        )
    return pages


def estimate_noise_fraction(pixels: np.ndarray) -> float:
    """Fraction of page area covered by isolated dark pixels.

    A pixel is isolated when it is dark (<128) and at least 7 of its 8
    neighbors are light; pixels beyond the border count as light.
    """
    gray = to_gray(pixels)
    light = np.pad((gray >= 128).astype(np.int16), 1, constant_values=1)
    neighbors = np.zeros(gray.shape, np.int16)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            neighbors += light[1 + dy:1 + dy + gray.shape[0],
                               1 + dx:1 + dx + gray.shape[1]]
    isolated = (gray < 128) & (neighbors >= 7)
    return float(isolated.sum()) / gray.size


def split_scan_quality(
    images: list[PageImage], hint: str = "unknown"
) -> tuple[list[PageImage], list[PageImage]]:
    """Partition pages into (good, poor) quality groups.

    A non-`unknown` manifest hint forces the class for all pages; otherwise
    a salt-and-pepper estimate decides per page.
    """
    good: list[PageImage] = []
    poor: list[PageImage] = []
    for image in images:
        if hint != "unknown":
            is_poor = hint == "poor"
        else:
            is_poor = estimate_noise_fraction(image.pixels) > NOISE_FRACTION_THRESHOLD
        target = poor if is_poor else good
        target.append(replace(image, quality_class="poor" if is_poor else "good"))
    return good, poor


def denoise_gray(gray: np.ndarray) -> np.ndarray:
    """Erode, dilate (3x3, one iteration each), then median-filter (radius 1)."""
    opened = cv2.dilate(cv2.erode(gray, MORPH_KERNEL, iterations=1),
                        MORPH_KERNEL, iterations=1)
    if min(opened.shape[:2]) < 3:
        return opened  # degenerate rasters pass through
    return cv2.medianBlur(opened, 3)


def enhance_image(image: PageImage) -> PageImage:
    """Enhancement chain for a poor-quality page: gray, 2x upscale, denoise.

    Nearest-neighbor upscaling keeps the chain exactly derivable by hand;
    denoising happens at the open+median stage regardless.
    """
    if image.quality_class != "poor":
        raise ValueError(
            f"{image.document_id} page {image.page_index}: enhancement is only "
            "applied to poor-quality pages"
        )
    gray = to_gray(image.pixels)
    scaled = cv2.resize(
        gray,
        (gray.shape[1] * SCALE_FACTOR, gray.shape[0] * SCALE_FACTOR),
        interpolation=cv2.INTER_NEAREST,
    )
    return replace(image, pixels=denoise_gray(scaled))


def dump_pages_png(images: list[PageImage], directory) -> list[Path]:
    """Debug dump of pages as PNG files named page_<index>.png."""
    from PIL import Image

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for image in images:
        path = directory / f"page_{image.page_index:04d}.png"
        Image.fromarray(image.pixels).save(path)
        written.append(path)
    return written
