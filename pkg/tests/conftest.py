"""Shared fixture builders: synthetic PDFs, a stub OCR engine, the golden
sentence document, randomized documents, and independent oracles."""

from __future__ import annotations

import os
import random
import stat

import numpy as np
import pytest
from PIL import Image, ImageDraw, ImageFont
from reportlab.lib.pagesizes import A4
from reportlab.lib.utils import ImageReader
from reportlab.pdfgen import canvas

from parlagest.annotate import (
    AnnotatedDocument,
    Dependency,
    Lemma,
    MorphFeatures,
    NamedEntity,
    PosTag,
    Span,
    Token,
)
from parlagest.metadata import SessionMetadata

# the in-repo WASM engine shim works wherever node does; make it visible to
# shutil.which so engine-dependent tests run instead of skipping
_SHIM_BIN = os.path.join(os.path.dirname(__file__), "..", "tools", "tesseract", "bin")
if os.path.isdir(_SHIM_BIN):
    _shim = os.path.abspath(_SHIM_BIN)
    if _shim not in os.environ.get("PATH", "").split(os.pathsep):
        os.environ["PATH"] = os.environ.get("PATH", "") + os.pathsep + _shim

DEJAVU = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"

FIGURE_SENTENCE = (
    "Alterspräsident Winfried Kretschmann: Meine sehr verehrten Damen und "
    "Herren, liebe Kolleginnen und Kollegen!"
)
FIGURE_SENTENCE_BEGIN = 2733
FIGURE_DOCUMENT_ID = "Plenarprotokoll_17_1_11.05.2021_S._1-13"


# -- PDF fixture builders -----------------------------------------------------


def make_text_pdf(path, pages: list[list[str]], page_size=A4) -> None:
    """Born-digital PDF: one text block per page, one Tj line per entry."""
    c = canvas.Canvas(str(path), pagesize=page_size)
    for lines in pages:
        t = c.beginText(72, page_size[1] - 72)
        for line in lines:
            t.textLine(line)
        c.drawText(t)
        c.showPage()
    c.save()


def render_text_image(
    text: str, size=(2480, 3508), font_size=48, origin=(200, 300)
) -> np.ndarray:
    """White page raster with the given text drawn in black."""
    img = Image.new("RGB", size, "white")
    draw = ImageDraw.Draw(img)
    font = ImageFont.truetype(DEJAVU, font_size)
    draw.multiline_text(origin, text, font=font, fill="black", spacing=24)
    return np.asarray(img)


def make_scanned_pdf(path, page_arrays: list[np.ndarray], tmp_dir, dpi=300) -> None:
    """Image-only PDF; each raster fills its page at the given nominal dpi."""
    first = page_arrays[0]
    size_pt = (first.shape[1] / dpi * 72.0, first.shape[0] / dpi * 72.0)
    c = canvas.Canvas(str(path), pagesize=size_pt)
    for i, arr in enumerate(page_arrays):
        png = os.path.join(str(tmp_dir), f"_fixture_page_{i}.png")
        Image.fromarray(arr).save(png)
        w_pt = arr.shape[1] / dpi * 72.0
        h_pt = arr.shape[0] / dpi * 72.0
        c.setPageSize((w_pt, h_pt))
        c.drawImage(ImageReader(png), 0, 0, width=w_pt, height=h_pt)
        c.showPage()
    c.save()


@pytest.fixture
def text_pdf(tmp_path):
    def build(name: str, pages: list[list[str]]):
        path = tmp_path / name
        make_text_pdf(path, pages)
        return path

    return build


@pytest.fixture
def scanned_pdf(tmp_path):
    def build(name: str, page_arrays: list[np.ndarray], dpi=300):
        path = tmp_path / name
        make_scanned_pdf(path, page_arrays, tmp_path, dpi=dpi)
        return path

    return build


# -- stub OCR engine ----------------------------------------------------------


STUB_ENGINE_SCRIPT = """#!/bin/sh
# contract: <engine> <image> <out-base> -l <model>
if [ -n "$STUB_OCR_FAIL" ]; then
    echo "stub engine exploded" >&2
    exit 3
fi
echo "$4" >> "${STUB_OCR_MODEL_LOG:-/dev/null}"
printf '%s' "$STUB_OCR_TEXT" > "$2.txt"
"""


@pytest.fixture
def stub_engine(tmp_path):
    """An executable honoring the engine CLI contract, driven by env vars."""
    script = tmp_path / "stub_ocr.sh"
    script.write_text(STUB_ENGINE_SCRIPT, encoding="utf-8")
    script.chmod(script.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return script


# -- golden sentence document -------------------------------------------------


def figure_sentence_sofa() -> str:
    header = (
        "Landtag von Baden-Württemberg\n"
        "17. Wahlperiode\n"
        "1. Sitzung\n"
        "Stuttgart, Dienstag, 11. Mai 2021\n\n"
        "Beginn der Sitzung und Eröffnung durch den Alterspräsidenten.\n"
    )
    filler = "Inhaltsübersicht des stenografischen Berichts der Sitzung. "
    pad = header + filler * 60
    pad = pad[: FIGURE_SENTENCE_BEGIN - 1] + "\n"
    assert len(pad) == FIGURE_SENTENCE_BEGIN
    return pad + FIGURE_SENTENCE


def figure_sentence_document() -> AnnotatedDocument:
    """The published excerpt rebuilt as a full document: lemmas at the
    published offsets, morphology for the name tokens, PNC dependencies."""
    sofa = figure_sentence_sofa()
    words = [
        # (begin, end, surface, lemma, pos)
        (2733, 2748, "Alterspräsident", "Alterspräsident", "NN"),
        (2749, 2757, "Winfried", "Winfried", "NE"),
        (2758, 2769, "Kretschmann", "Kretschmann", "NE"),
        (2769, 2770, ":", ":", "$."),
        (2771, 2776, "Meine", "mein", "PPOSAT"),
        (2777, 2781, "sehr", "sehr", "ADV"),
        (2782, 2791, "verehrten", "verehren", "ADJA"),
        (2792, 2797, "Damen", "Dame", "NN"),
        (2798, 2801, "und", "und", "KON"),
        (2802, 2808, "Herren", "Herr", "NN"),
        (2808, 2809, ",", ",", "$,"),
        (2810, 2815, "liebe", "lieb", "ADJA"),
        (2816, 2827, "Kolleginnen", "Kollegin", "NN"),
        (2828, 2831, "und", "und", "KON"),
        (2832, 2840, "Kollegen", "Kollege", "NN"),
        (2840, 2841, "!", "!", "$."),
    ]
    for begin, end, surface, _, _ in words:
        assert sofa[begin:end] == surface, (begin, end, surface, sofa[begin:end])
    lemmas = tuple(Lemma(Span(b, e), lemma) for b, e, _, lemma, _ in words)
    pos_tags = tuple(PosTag(Span(b, e), pos) for b, e, _, _, pos in words)
    morph = (
        MorphFeatures.from_features(
            Span(2749, 2757), {"Case": "Nom", "Gender": "Masc", "Number": "Sing"}
        ),
        MorphFeatures.from_features(
            Span(2758, 2769), {"Case": "Nom", "Gender": "Masc", "Number": "Sing"}
        ),
    )
    morph_ref = {1: 0, 2: 1}
    tokens = tuple(
        Token(
            span=Span(b, e),
            order=i,
            lemma_ref=i,
            pos_ref=i,
            morph_ref=morph_ref.get(i),
        )
        for i, (b, e, _, _, _) in enumerate(words)
    )
    dependencies = (
        Dependency(Span(2733, 2748), governor=2, dependent=0, dependency_type="PNC"),
        Dependency(Span(2749, 2757), governor=2, dependent=1, dependency_type="PNC"),
    )
    entities = (NamedEntity(Span(2749, 2769), "PER"),)
    metadata = SessionMetadata.for_date(
        11, 5, 2021,
        title="Landtag von Baden-Württemberg-Plenarprotokoll vom 11.05.2021",
        subtitle="17.Wahlperiode__1.Sitzung",
    )
    return AnnotatedDocument(
        document_id=FIGURE_DOCUMENT_ID,
        sofa=sofa,
        sentences=(Span(2733, 2841),),
        tokens=tokens,
        lemmas=lemmas,
        pos_tags=pos_tags,
        morph=morph,
        dependencies=dependencies,
        entities=entities,
        metadata=metadata,
        provenance="native_text",
        script="antiqua",
    )


# -- randomized documents -----------------------------------------------------

_WORD_POOL = (
    "und der die das Sitzung Landtag Herr Frau Dame gut neu groß klein "
    "Bericht Antrag Wahl Haus Jahr Zeit Wort sehr auch über für grün "
    "Bürger Straße Köln München Jänner zwölf drei fünf"
).split()
_PUNCT_POOL = [".", ",", "!", "?", ":", ";"]
_POS_POOL = ["NN", "NE", "ADJA", "ADV", "VVFIN", "KON", "$.", "$,"]
_DEP_POOL = ["PNC", "SB", "NK", "OA", "MO", "CJ"]
_FEATURE_POOL = {
    "Case": ["Nom", "Gen", "Dat", "Acc"],
    "Gender": ["Masc", "Fem", "Neut"],
    "Number": ["Sing", "Plur"],
    "Person": ["1", "2", "3"],
}


def random_document(rng: random.Random, index: int) -> AnnotatedDocument:
    """A small invariant-satisfying document with randomized layers."""
    n_tokens = rng.randint(0, 20)
    pieces: list[tuple[int, int]] = []
    sofa = ""
    for i in range(n_tokens):
        if sofa:
            sofa += " " * rng.randint(1, 2) if rng.random() < 0.9 else "\n"
        word = rng.choice(_WORD_POOL) if rng.random() < 0.8 else rng.choice(_PUNCT_POOL)
        pieces.append((len(sofa), len(sofa) + len(word)))
        sofa += word
    tokens = [Token(Span(b, e), order=i) for i, (b, e) in enumerate(pieces)]

    lemmas: tuple = ()
    pos_tags: tuple = ()
    if tokens and rng.random() < 0.8:
        lemmas = tuple(
            Lemma(t.span, sofa[t.span.begin:t.span.end].lower() or "x") for t in tokens
        )
        pos_tags = tuple(PosTag(t.span, rng.choice(_POS_POOL)) for t in tokens)
        tokens = [
            Token(t.span, t.order, lemma_ref=i, pos_ref=i)
            for i, t in enumerate(tokens)
        ]
    morph = []
    for i, t in enumerate(tokens):
        if rng.random() < 0.25:
            features = {
                key: rng.choice(values)
                for key, values in _FEATURE_POOL.items()
                if rng.random() < 0.6
            }
            tokens[i] = Token(
                t.span, t.order, t.lemma_ref, t.pos_ref, morph_ref=len(morph)
            )
            morph.append(MorphFeatures.from_features(t.span, features))
    dependencies = []
    if len(tokens) >= 2:
        for _ in range(rng.randint(0, min(5, len(tokens)))):
            gov, dep = rng.sample(range(len(tokens)), 2)
            dependencies.append(
                Dependency(
                    tokens[dep].span, gov, dep, rng.choice(_DEP_POOL),
                    flavor=rng.choice(["basic", "enhanced"]),
                )
            )
        if rng.random() < 0.3:
            root = rng.randrange(len(tokens))
            dependencies.append(
                Dependency(tokens[root].span, root, root, "ROOT")
            )
    entities = []
    if tokens and rng.random() < 0.5:
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(len(tokens))
            j = min(len(tokens) - 1, i + rng.randint(0, 2))
            entities.append(
                NamedEntity(
                    Span(tokens[i].span.begin, tokens[j].span.end),
                    rng.choice(["PER", "LOC", "ORG", "MISC"]),
                )
            )
    metadata = None
    if rng.random() < 0.7:
        year = rng.randint(1946, 2021)
        month = rng.randint(1, 12)
        day = rng.randint(1, 28)
        subtitle = (
            f"{rng.randint(1, 20)}.Wahlperiode__{rng.randint(1, 150)}.Sitzung"
            if rng.random() < 0.7
            else ""
        )
        metadata = SessionMetadata.for_date(
            day, month, year,
            title=f"Testprotokoll vom {day:02d}.{month:02d}.{year}",
            subtitle=subtitle,
        )
    return AnnotatedDocument(
        document_id=f"doc_{index:04d}",
        sofa=sofa,
        sentences=(Span(tokens[0].span.begin, tokens[-1].span.end),) if tokens else (),
        tokens=tuple(tokens),
        lemmas=lemmas,
        pos_tags=pos_tags,
        morph=tuple(morph),
        dependencies=tuple(dependencies),
        entities=tuple(entities),
        metadata=metadata,
        provenance=rng.choice(["native_text", "ocr"]),
        script=rng.choice(["antiqua", "fraktur"]),
    )


# -- independent oracles ------------------------------------------------------


def levenshtein_full(a: str, b: str) -> int:
    """Plain full-matrix Levenshtein DP; the oracle for the delete-index path."""
    m, n = len(a), len(b)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dp[i][0] = i
    for j in range(n + 1):
        dp[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            dp[i][j] = min(
                dp[i - 1][j] + 1,
                dp[i][j - 1] + 1,
                dp[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return dp[m][n]


def brute_force_best(query: str, entries: dict[str, int], max_distance: int):
    """Scan the whole dictionary; rank by (distance, -frequency, word).

    Case-insensitive like the lookup: variants merge on the lowercased form
    with the highest frequency.
    """
    vocab: dict[str, int] = {}
    for word, freq in entries.items():
        low = word.lower()
        vocab[low] = max(vocab.get(low, 0), freq)
    q = query.lower()
    best = None
    for word, freq in vocab.items():
        dist = levenshtein_full(q, word)
        if dist > max_distance:
            continue
        rank = (dist, -freq, word)
        if best is None or rank < best:
            best = rank
    return best  # (distance, -frequency, word_lower) or None
