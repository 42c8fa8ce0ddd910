"""Normalization, segmentation, native extraction and payload attachment."""

from __future__ import annotations

import json

import pytest

from parlagest import annotate
from parlagest.annotate import (
    AnnotatedDocument,
    DocumentInvariantError,
    Lemma,
    PayloadError,
    PosTag,
    Span,
    Token,
    attach_external_annotations,
    dehyphenate,
    extract_native_text,
    normalize_text,
    segment,
    validate_document,
)
from parlagest.manifest import DocumentRecord
from tests.conftest import figure_sentence_document, make_text_pdf


# -- normalize ---------------------------------------------------------------


def test_crlf_becomes_lf():
    assert normalize_text("a\r\nb") == "a\nb"


def test_nfc_composition():
    decomposed = "über"  # u + combining diaeresis
    assert normalize_text(decomposed) == "über"


def test_control_chars_removed_except_lf_ff():
    assert normalize_text("a\x00b\x07c\td\fe\nf\rg") == "abcd\fe\nfg"


def test_normalize_idempotent():
    text = "Schon normal.\nZweite Zeile.\fNächste Seite ü."
    assert normalize_text(text) == text
    assert normalize_text(normalize_text("a\r\nü")) == normalize_text("a\r\nü")


# -- segment -----------------------------------------------------------------


def test_single_terminal_sentence_and_tokens():
    sentences, tokens = segment("Meine Damen und Herren!")
    assert len(sentences) == 1
    texts = ["Meine Damen und Herren!"[t.span.begin:t.span.end] for t in tokens]
    assert texts == ["Meine", "Damen", "und", "Herren", "!"]


def test_abbreviation_does_not_split():
    text = "Dr. Müller spricht."
    sentences, _ = segment(text)
    assert len(sentences) == 1
    assert text[sentences[0].begin:sentences[0].end] == text


def test_empty_text():
    assert segment("") == ((), ())


def test_two_sentences_with_quote_opening():
    text = 'Das Haus stimmt zu. "Wir beginnen", sagt er.'
    sentences, _ = segment(text)
    assert len(sentences) == 2


def test_tokens_partition_non_whitespace():
    text = "Herr Präsident, werte Gäste! Wir beraten (Drucksache 17/1) heute."
    _, tokens = segment(text)
    rebuilt = []
    last = 0
    for tok in tokens:
        assert text[last:tok.span.begin].strip() == ""  # only whitespace between
        rebuilt.append(text[tok.span.begin:tok.span.end])
        last = tok.span.end
    assert text[last:].strip() == ""
    assert "".join(rebuilt) == "".join(text.split())


def test_every_token_inside_exactly_one_sentence():
    text = "Erster Satz hier. Zweiter Satz! Und ein dritter?"
    sentences, tokens = segment(text)
    for tok in tokens:
        inside = [
            s for s in sentences if s.begin <= tok.span.begin and tok.span.end <= s.end
        ]
        assert len(inside) == 1


def test_offset_shift_by_prefix():
    text = "Zweiter Satz folgt hier. Er endet bald."
    prefix = "Vorbemerkung endet jetzt. "
    base_sents, base_tokens = segment(text)
    shifted_sents, shifted_tokens = segment(prefix + text)
    k = len(prefix)
    tail_tokens = [t for t in shifted_tokens if t.span.begin >= k]
    assert [(t.span.begin - k, t.span.end - k) for t in tail_tokens] == [
        (t.span.begin, t.span.end) for t in base_tokens
    ]
    tail_sents = [s for s in shifted_sents if s.begin >= k]
    assert [(s.begin - k, s.end - k) for s in tail_sents] == [
        (s.begin, s.end) for s in base_sents
    ]


def test_segment_deterministic():
    text = "Die Sitzung ist eröffnet. Wir beginnen mit Punkt 1."
    assert segment(text) == segment(text)


# -- dehyphenation and native extraction --------------------------------------


def test_dehyphenate_joins_plain_compound():
    assert dehyphenate("Bundes-\nregierung") == "Bundesregierung"


def test_dehyphenate_keeps_protected_name():
    assert dehyphenate("Baden-\nWürttemberg") == "Baden-Württemberg"


def test_dehyphenate_leaves_non_alphabetic():
    assert dehyphenate("Absatz 3-\n4 bleibt") == "Absatz 3-\n4 bleibt"


def test_extract_native_text_passthrough(tmp_path):
    pdf = tmp_path / "one.pdf"
    make_text_pdf(pdf, [["Die Sitzung ist eröffnet."]])
    record = DocumentRecord(
        id="d", parliament="P", local_path=pdf, state="classified",
        classification="readable", provenance="native_text",
    )
    assert "Sitzung" in extract_native_text(record)


def test_extract_native_text_dehyphenates(tmp_path):
    pdf = tmp_path / "hyph.pdf"
    make_text_pdf(pdf, [["Die Bundes-", "regierung sowie Baden-", "Württemberg."]])
    record = DocumentRecord(
        id="d", parliament="P", local_path=pdf, state="classified",
        classification="readable", provenance="native_text",
    )
    text = extract_native_text(record)
    assert "Bundesregierung" in text
    assert "Baden-Württemberg" in text


def test_extract_native_text_scanned_guard(tmp_path):
    record = DocumentRecord(
        id="d", parliament="P", local_path=tmp_path / "x.pdf", state="classified",
        classification="scanned", provenance="ocr",
    )
    with pytest.raises(ValueError):
        extract_native_text(record)


def test_extract_pages_joined_with_form_feed(tmp_path):
    pdf = tmp_path / "two.pdf"
    make_text_pdf(pdf, [["Seite eins"], ["Seite zwei"]])
    record = DocumentRecord(
        id="d", parliament="P", local_path=pdf, state="classified",
        classification="readable", provenance="native_text",
    )
    assert extract_native_text(record) == "Seite eins\fSeite zwei"


# -- payload attachment --------------------------------------------------------


def bare_document() -> AnnotatedDocument:
    base = figure_sentence_document()
    sentences, tokens = segment(base.sofa)
    return AnnotatedDocument(
        document_id=base.document_id,
        sofa=base.sofa,
        sentences=sentences,
        tokens=tokens,
        metadata=base.metadata,
    )


def test_attach_figure_lemma_sets_token_ref():
    doc = bare_document()
    token_spans = [[t.span.begin, t.span.end] for t in doc.tokens]
    payload = {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {
            "lemmas": [
                {"begin": b, "end": e, "value": doc.sofa[b:e].lower()}
                for b, e in token_spans
            ],
        },
    }
    # the published lemma for the token "verehrten"
    for item in payload["layers"]["lemmas"]:
        if item["begin"] == 2782:
            assert item["end"] == 2791
            assert doc.sofa[2782:2791] == "verehrten"
            item["value"] = "verehren"
    out = attach_external_annotations(doc, payload)
    token = next(t for t in out.tokens if t.span.begin == 2782)
    assert token.lemma_ref is not None
    assert out.lemmas[token.lemma_ref].value == "verehren"
    validate_document(out)


def test_attach_empty_payload_is_noop():
    doc = bare_document()
    payload = {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {k: [] for k in
                   ("sentences", "tokens", "lemmas", "pos", "morph",
                    "dependencies", "entities")},
    }
    assert attach_external_annotations(doc, payload) == doc


def test_attach_rejects_out_of_range_offset():
    doc = bare_document()
    payload = {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {"entities": [{"begin": 0, "end": len(doc.sofa) + 5, "label": "X"}]},
    }
    with pytest.raises(PayloadError) as err:
        attach_external_annotations(doc, payload)
    assert str(len(doc.sofa) + 5) in str(err.value)


def test_attach_rejects_wrong_document_and_hash():
    doc = bare_document()
    with pytest.raises(PayloadError):
        attach_external_annotations(doc, {"document_id": "other", "sofa_sha256": ""})
    with pytest.raises(PayloadError):
        attach_external_annotations(
            doc, {"document_id": doc.document_id, "sofa_sha256": "deadbeef",
                  "layers": {"entities": [{"begin": 0, "end": 1, "label": "X"}]}}
        )


def test_attach_rejects_unmatched_token_span():
    doc = bare_document()
    payload = {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {"lemmas": [{"begin": 1, "end": 4, "value": "nix"}]},
    }
    with pytest.raises(PayloadError) as err:
        attach_external_annotations(doc, payload)
    assert "[1,4)" in str(err.value)


def test_attach_replaces_segmentation_when_flagged():
    doc = bare_document()
    payload = {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {
            "sentences": [{"begin": 0, "end": 10}],
            "tokens": [{"begin": 0, "end": 7}, {"begin": 8, "end": 10}],
        },
    }
    out = attach_external_annotations(doc, payload, replace_segmentation=True)
    assert len(out.tokens) == 2
    assert out.sentences == (Span(0, 10),)
    unchanged = attach_external_annotations(doc, payload, replace_segmentation=False)
    assert unchanged.tokens == doc.tokens


def test_attach_output_revalidates_full_payload():
    doc = bare_document()
    payload = annotate.native_layers_payload(figure_sentence_document())
    # the payload carries its own segmentation, so adopt it wholesale
    out = attach_external_annotations(doc, payload, replace_segmentation=True)
    validate_document(out)
    assert len(out.lemmas) == len(out.tokens)
    assert len(out.pos_tags) == len(out.tokens)
    assert out.dependencies[0].dependency_type == "PNC"
    assert json.dumps(annotate.native_layers_payload(out), sort_keys=True) == \
        json.dumps(payload, sort_keys=True)


# -- validation ----------------------------------------------------------------


def test_validate_rejects_overlapping_tokens():
    doc = AnnotatedDocument(
        document_id="d", sofa="abcdef",
        tokens=(Token(Span(0, 3)), Token(Span(2, 5), order=1)),
    )
    with pytest.raises(DocumentInvariantError):
        validate_document(doc)


def test_validate_rejects_span_outside_sofa():
    doc = AnnotatedDocument(document_id="d", sofa="ab", sentences=(Span(0, 5),))
    with pytest.raises(DocumentInvariantError):
        validate_document(doc)


def test_validate_rejects_mismatched_reference_span():
    doc = AnnotatedDocument(
        document_id="d", sofa="ab cd",
        tokens=(Token(Span(0, 2), lemma_ref=0), Token(Span(3, 5), order=1, lemma_ref=1)),
        lemmas=(Lemma(Span(0, 2), "ab"), Lemma(Span(0, 2), "zz")),
    )
    with pytest.raises(DocumentInvariantError):
        validate_document(doc)


def test_validate_rejects_noncanonical_morph_value():
    from parlagest.annotate import MorphFeatures

    bad = MorphFeatures(span=Span(0, 2), value="Number=Sing|Case=Nom")  # unsorted
    doc = AnnotatedDocument(document_id="d", sofa="ab", morph=(bad,))
    with pytest.raises(DocumentInvariantError):
        validate_document(doc)


def test_validate_rejects_partial_lemma_layer():
    doc = AnnotatedDocument(
        document_id="d", sofa="ab cd",
        tokens=(Token(Span(0, 2)), Token(Span(3, 5), order=1)),
        lemmas=(Lemma(Span(0, 2), "ab"),),
    )
    with pytest.raises(DocumentInvariantError):
        validate_document(doc)


def test_morph_value_roundtrip():
    from parlagest.annotate import MorphFeatures, feature_string, parse_feature_string

    m = MorphFeatures.from_features(
        Span(0, 1), {"Gender": "Masc", "Case": "Nom", "Number": "Sing"}
    )
    assert m.value == "Case=Nom|Gender=Masc|Number=Sing"
    assert parse_feature_string(m.value) == {
        "Case": "Nom", "Gender": "Masc", "Number": "Sing"
    }
    assert feature_string(parse_feature_string(m.value)) == m.value
