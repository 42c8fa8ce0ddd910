"""XMI serialization: golden shape, round trips, reference integrity."""

from __future__ import annotations

import gzip
import random
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from parlagest.annotate import AnnotatedDocument, Span, Token
from parlagest.metadata import DocumentMetaData
from parlagest.xmi import (
    DanglingReferenceError,
    MalformedXmiError,
    OffsetRangeError,
    XmiValidationError,
    document_to_xml_bytes,
    read_xmi,
    read_xmi_bytes,
    write_xmi,
)
from tests.conftest import figure_sentence_document, random_document

GOLDEN_PATH = Path(__file__).parent / "data" / "figure_sentence.golden.xml"

GOLDEN_META = DocumentMetaData(
    document_title="Landtag von Baden-Württemberg-Plenarprotokoll vom 11.05.2021",
    document_id="Plenarprotokoll_17_1_11.05.2021_S._1-13.xmi.gz",
    document_uri=(
        "file:/corpora/BadenWuertemberg/xmi/17/"
        "Plenarprotokoll_17_1_11.05.2021_S._1-13.xmi.gz"
    ),
    document_base_uri="file:/corpora/",
)


def canonical(xml_bytes: bytes) -> bytes:
    return ET.canonicalize(xml_data=xml_bytes.decode("utf-8")).encode("utf-8")


def test_golden_sentence_canonical_bytes():
    doc = figure_sentence_document()
    produced = canonical(document_to_xml_bytes(doc, GOLDEN_META))
    assert produced == canonical(GOLDEN_PATH.read_bytes())


def test_golden_sentence_required_attributes():
    doc = figure_sentence_document()
    root = ET.fromstring(document_to_xml_bytes(doc, GOLDEN_META))

    def locals_of(name):
        return [el for el in root if el.tag.rsplit("}", 1)[-1] == name]

    (ann,) = locals_of("DocumentAnnotation")
    assert ann.get("dateDay") == "11"
    assert ann.get("dateMonth") == "5"
    assert ann.get("dateYear") == "2021"
    assert ann.get("subtitle") == "17.Wahlperiode__1.Sitzung"
    assert ann.get("timestamp") == "1620691200000"

    lemma = next(
        el for el in locals_of("Lemma")
        if el.get("begin") == "2733" and el.get("end") == "2748"
    )
    assert lemma.get("value") == "Alterspräsident"

    morph = next(
        el for el in locals_of("MorphologicalFeatures")
        if el.get("begin") == "2749" and el.get("end") == "2757"
    )
    assert morph.get("value") == "Case=Nom|Gender=Masc|Number=Sing"
    assert morph.get("gender") == "Masc"
    assert morph.get("number") == "Sing"
    assert morph.get("case") == "Nom"

    # the token at the lemma's offsets references it by xmi:id
    token = next(
        el for el in locals_of("Token")
        if el.get("begin") == "2733" and el.get("end") == "2748"
    )
    xmi_id = "{http://www.omg.org/XMI}id"
    assert token.get("lemma") == lemma.get(xmi_id)

    deps = locals_of("Dependency")
    assert all(d.get("DependencyType") == "PNC" for d in deps)
    assert all(d.get("flavor") == "basic" for d in deps)


def test_every_id_unique_and_references_resolve():
    doc = figure_sentence_document()
    root = ET.fromstring(document_to_xml_bytes(doc, GOLDEN_META))
    xmi_id = "{http://www.omg.org/XMI}id"
    ids = [el.get(xmi_id) for el in root]
    assert len(ids) == len(set(ids))
    id_set = set(ids)
    for el in root:
        for attr in ("lemma", "pos", "morph", "Governor", "Dependent"):
            ref = el.get(attr)
            if ref is not None:
                assert ref in id_set


def test_empty_document_writes_valid_xmi(tmp_path):
    doc = AnnotatedDocument(document_id="empty", sofa="")
    path = write_xmi(doc, tmp_path, gzip_output=False)
    back = read_xmi(path)
    assert back == doc


def test_write_refuses_dangling_reference(tmp_path):
    doc = AnnotatedDocument(
        document_id="bad", sofa="ab",
        tokens=(Token(Span(0, 2), lemma_ref=3),),
    )
    with pytest.raises(XmiValidationError) as err:
        write_xmi(doc, tmp_path)
    assert "lemma" in str(err.value)
    assert not list(tmp_path.iterdir())  # nothing written


def test_write_refuses_form_feed_in_sofa(tmp_path):
    doc = AnnotatedDocument(document_id="ff", sofa="Seite\feins")
    with pytest.raises(XmiValidationError):
        write_xmi(doc, tmp_path)


def test_gzip_naming_and_stability(tmp_path):
    doc = figure_sentence_document()
    p1 = write_xmi(doc, tmp_path, gzip_output=True, doc_meta=GOLDEN_META)
    assert p1.name == "Plenarprotokoll_17_1_11.05.2021_S._1-13.xmi.gz"
    assert p1.read_bytes()[:2] == b"\x1f\x8b"
    bytes_first = p1.read_bytes()
    p2 = write_xmi(doc, tmp_path, gzip_output=True, doc_meta=GOLDEN_META)
    assert p2.read_bytes() == bytes_first
    plain = write_xmi(doc, tmp_path, gzip_output=False, doc_meta=GOLDEN_META)
    assert plain.name.endswith(".xmi")
    assert gzip.decompress(bytes_first) == plain.read_bytes()


def test_roundtrip_golden_document(tmp_path):
    doc = figure_sentence_document()
    assert read_xmi(write_xmi(doc, tmp_path)) == doc


def test_roundtrip_randomized_documents(tmp_path):
    rng = random.Random(404)
    for i in range(100):
        doc = random_document(rng, i)
        path = write_xmi(doc, tmp_path, gzip_output=bool(i % 2))
        assert read_xmi(path) == doc, f"roundtrip failed for doc {i}"


def test_dangling_token_lemma_reference_read_error(tmp_path):
    doc = figure_sentence_document()
    path = write_xmi(doc, tmp_path, gzip_output=False)
    text = path.read_text("utf-8").replace('lemma="', 'lemma="99')
    with pytest.raises(DanglingReferenceError):
        read_xmi_bytes(text.encode("utf-8"))


def test_offset_out_of_sofa_read_error(tmp_path):
    doc = AnnotatedDocument(document_id="d", sofa="kurz", sentences=(Span(0, 4),))
    path = write_xmi(doc, tmp_path, gzip_output=False)
    text = path.read_text("utf-8")
    sentence = text[text.index("<type:Sentence"):]
    sentence_bad = sentence.replace('end="4"', 'end="400"')
    text = text[: text.index("<type:Sentence")] + sentence_bad
    with pytest.raises(OffsetRangeError):
        read_xmi_bytes(text.encode("utf-8"))


def test_malformed_xml_read_error():
    with pytest.raises(MalformedXmiError):
        read_xmi_bytes(b"<xmi:XMI xmlns:xmi='http://www.omg.org/XMI'>")


def test_figure_morph_value_parses_from_file(tmp_path):
    doc = figure_sentence_document()
    back = read_xmi(write_xmi(doc, tmp_path))
    morph = back.morph[0]
    assert morph.case == "Nom"
    assert morph.gender == "Masc"
    assert morph.number == "Sing"
    assert morph.features == {"Case": "Nom", "Gender": "Masc", "Number": "Sing"}
