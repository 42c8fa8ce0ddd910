"""XMI serialization of annotated documents, gzip-compressed by default.

Element and attribute shapes follow the corpus schema: DocumentAnnotation
(dateDay, subtitle, dateMonth, dateYear, timestamp), DocumentMetaData,
Sentence, Lemma, PosTag, Token (lemma/pos/morph/order references by
xmi:id), MorphologicalFeatures, Dependency (Governor, Dependent,
DependencyType, flavor), NamedEntity. The sofa text is embedded once.
Namespace prefixes map to stable URIs; local names are the contract.
"""

from __future__ import annotations

import gzip
import io
import xml.etree.ElementTree as ET
from pathlib import Path

from .annotate import (
    AnnotatedDocument,
    Dependency,
    DocumentInvariantError,
    Lemma,
    MorphFeatures,
    NamedEntity,
    PosTag,
    Span,
    Token,
    parse_feature_string,
    validate_document,
)
from .metadata import DocumentMetaData, SessionMetadata, timestamp_for_date

NAMESPACES = {
    "xmi": "http://www.omg.org/XMI",
    "cas": "http:///uima/cas.ecore",
    "annotation": "http:///parlagest/annotation.ecore",
    "type": "http:///parlagest/type.ecore",
    "morph": "http:///parlagest/morph.ecore",
    "dependency": "http:///parlagest/dependency.ecore",
}

GZIP_MAGIC = b"\x1f\x8b"


class XmiError(Exception):
    pass


class XmiValidationError(XmiError):
    """Document violates an invariant; nothing is written."""


class MalformedXmiError(XmiError):
    pass


class DanglingReferenceError(XmiError):
    pass


class OffsetRangeError(XmiError):
    pass


def _check_xml_text(value: str, what: str) -> None:
    for ch in value:
        cp = ord(ch)
        if cp in (0x9, 0xA, 0xD) or 0x20 <= cp <= 0xD7FF or 0xE000 <= cp <= 0xFFFD or cp > 0xFFFF:
            continue
        raise XmiValidationError(
            f"{what} contains U+{cp:04X}, which XML 1.0 cannot represent; "
            "translate page breaks to newlines before packaging"
        )


def output_filename(document_id: str, gzip_output: bool) -> str:
    return f"{document_id}.xmi.gz" if gzip_output else f"{document_id}.xmi"


def _sub(parent: ET.Element, tag: str, xmi_id: int, **attrs) -> ET.Element:
    el = ET.SubElement(parent, tag)
    el.set("xmi:id", str(xmi_id))
    for key, value in attrs.items():
        if value is not None:
            el.set(key, value)
    return el


def document_to_xml_bytes(
    doc: AnnotatedDocument, doc_meta: DocumentMetaData
) -> bytes:
    """Serialize to XMI bytes; raises XmiValidationError instead of writing
    a document that violates an invariant."""
    try:
        validate_document(doc)
    except DocumentInvariantError as exc:
        raise XmiValidationError(str(exc)) from exc
    _check_xml_text(doc.sofa, "sofa")
    for lemma in doc.lemmas:
        _check_xml_text(lemma.value, "lemma value")
    for pos in doc.pos_tags:
        _check_xml_text(pos.value, "pos value")
    for m in doc.morph:
        _check_xml_text(m.value, "morphology value")
    for dep in doc.dependencies:
        _check_xml_text(dep.dependency_type, "dependency type")
        _check_xml_text(dep.flavor, "dependency flavor")
    for ent in doc.entities:
        _check_xml_text(ent.label, "entity label")
    if doc.metadata is not None:
        _check_xml_text(doc.metadata.title, "title")
        _check_xml_text(doc.metadata.subtitle, "subtitle")

    root = ET.Element("xmi:XMI")
    for prefix, uri in NAMESPACES.items():
        root.set(f"xmlns:{prefix}", uri)
    root.set("xmi:version", "2.0")

    next_id = 1

    def take() -> int:
        nonlocal next_id
        value = next_id
        next_id += 1
        return value

    _sub(
        root, "cas:Sofa", take(),
        sofaNum="1", sofaID="_InitialView", mimeType="text", sofaString=doc.sofa,
    )
    meta = doc.metadata
    if meta is not None:
        _sub(
            root, "annotation:DocumentAnnotation", take(),
            sofa="1",
            dateDay=str(meta.date_day),
            subtitle=meta.subtitle,
            dateMonth=str(meta.date_month),
            dateYear=str(meta.date_year),
            timestamp=str(meta.timestamp_ms),
        )
    else:
        _sub(root, "annotation:DocumentAnnotation", take(), sofa="1", dateMissing="true")
    _sub(
        root, "annotation:DocumentProvenance", take(),
        sofa="1", provenance=doc.provenance, script=doc.script,
    )
    _sub(
        root, "type:DocumentMetaData", take(),
        sofa="1",
        begin="0",
        end=str(len(doc.sofa)),
        language=doc_meta.language,
        documentTitle=doc_meta.document_title,
        documentId=doc_meta.document_id,
        documentUri=doc_meta.document_uri,
        documentBaseUri=doc_meta.document_base_uri,
        isLastSegment="true" if doc_meta.is_last_segment else "false",
    )
    for span in doc.sentences:
        _sub(root, "type:Sentence", take(), sofa="1",
             begin=str(span.begin), end=str(span.end))
    lemma_ids = []
    for lemma in doc.lemmas:
        lemma_ids.append(take())
        _sub(root, "type:Lemma", lemma_ids[-1], sofa="1",
             begin=str(lemma.span.begin), end=str(lemma.span.end), value=lemma.value)
    pos_ids = []
    for pos in doc.pos_tags:
        pos_ids.append(take())
        _sub(root, "type:PosTag", pos_ids[-1], sofa="1",
             begin=str(pos.span.begin), end=str(pos.span.end), value=pos.value)
    morph_ids = []
    for m in doc.morph:
        morph_ids.append(take())
        _sub(
            root, "morph:MorphologicalFeatures", morph_ids[-1], sofa="1",
            begin=str(m.span.begin), end=str(m.span.end),
            gender=m.gender, number=m.number, case=m.case, value=m.value,
        )
    token_ids = []
    for tok in doc.tokens:
        token_ids.append(take())
        _sub(
            root, "type:Token", token_ids[-1], sofa="1",
            begin=str(tok.span.begin), end=str(tok.span.end),
            lemma=None if tok.lemma_ref is None else str(lemma_ids[tok.lemma_ref]),
            pos=None if tok.pos_ref is None else str(pos_ids[tok.pos_ref]),
            morph=None if tok.morph_ref is None else str(morph_ids[tok.morph_ref]),
            order=str(tok.order),
        )
    for dep in doc.dependencies:
        _sub(
            root, "dependency:Dependency", take(), sofa="1",
            begin=str(dep.span.begin), end=str(dep.span.end),
            Governor=str(token_ids[dep.governor]),
            Dependent=str(token_ids[dep.dependent]),
            DependencyType=dep.dependency_type,
            flavor=dep.flavor,
        )
    for ent in doc.entities:
        _sub(root, "type:NamedEntity", take(), sofa="1",
             begin=str(ent.span.begin), end=str(ent.span.end), value=ent.label)

    buf = io.BytesIO()
    ET.ElementTree(root).write(buf, encoding="utf-8", xml_declaration=True)
    return buf.getvalue()


def write_xmi(
    doc: AnnotatedDocument,
    out,
    gzip_output: bool = True,
    doc_meta: DocumentMetaData | None = None,
) -> Path:
    """Write `<id>.xmi.gz` (or `.xmi`) into the directory `out`.

    Output is byte-stable across reruns: ids are assigned deterministically
    and the gzip header carries no timestamp.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    filename = output_filename(doc.document_id, gzip_output)
    path = out / filename
    if doc_meta is None:
        base = out.resolve().as_uri() + "/"
        doc_meta = DocumentMetaData(
            document_title=doc.metadata.title if doc.metadata else "",
            document_id=filename,
            document_uri=base + filename,
            document_base_uri=base,
        )
    payload = document_to_xml_bytes(doc, doc_meta)
    if gzip_output:
        with open(path, "wb") as fh:
            with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
                gz.write(payload)
    else:
        path.write_bytes(payload)
    return path


# -- reading --------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1].rsplit(":", 1)[-1]


def _attrs(el: ET.Element) -> dict[str, str]:
    return {_local(k): v for k, v in el.attrib.items()}


def _span_of(attrs: dict[str, str], sofa_len: int, what: str) -> Span:
    try:
        begin, end = int(attrs["begin"]), int(attrs["end"])
    except (KeyError, ValueError) as exc:
        raise MalformedXmiError(f"{what}: missing or non-integer begin/end") from exc
    if not (0 <= begin <= end <= sofa_len):
        raise OffsetRangeError(
            f"{what}: span [{begin},{end}) outside sofa of length {sofa_len}"
        )
    return Span(begin, end)


def read_xmi_bytes(data: bytes) -> AnnotatedDocument:
    if data[:2] == GZIP_MAGIC:
        data = gzip.decompress(data)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXmiError(f"not well-formed XML: {exc}") from exc

    by_local: dict[str, list[ET.Element]] = {}
    for el in root:
        by_local.setdefault(_local(el.tag), []).append(el)

    sofas = by_local.get("Sofa", [])
    if not sofas:
        raise MalformedXmiError("no Sofa element")
    sofa = sofas[0].get("sofaString", "")
    n = len(sofa)

    metadata: SessionMetadata | None = None
    for el in by_local.get("DocumentAnnotation", []):
        attrs = _attrs(el)
        if attrs.get("dateMissing") == "true" or "dateDay" not in attrs:
            continue
        try:
            day = int(attrs["dateDay"])
            month = int(attrs["dateMonth"])
            year = int(attrs["dateYear"])
            stated = int(attrs.get("timestamp", "-1"))
        except (KeyError, ValueError) as exc:
            raise MalformedXmiError("DocumentAnnotation has malformed date fields") from exc
        expected = timestamp_for_date(day, month, year)
        if stated != expected:
            raise MalformedXmiError(
                f"timestamp {stated} does not match {day:02d}.{month:02d}.{year}"
            )
        metadata = SessionMetadata.for_date(
            day, month, year, subtitle=attrs.get("subtitle", "")
        )

    provenance, script = "native_text", "antiqua"
    for el in by_local.get("DocumentProvenance", []):
        provenance = el.get("provenance", provenance)
        script = el.get("script", script)

    document_id = ""
    document_title = ""
    for el in by_local.get("DocumentMetaData", []):
        attrs = _attrs(el)
        document_title = attrs.get("documentTitle", "")
        document_id = attrs.get("documentId", "")
        for suffix in (".xmi.gz", ".xmi"):
            if document_id.endswith(suffix):
                document_id = document_id[: -len(suffix)]
                break
    if metadata is not None and document_title:
        metadata = SessionMetadata.for_date(
            metadata.date_day, metadata.date_month, metadata.date_year,
            title=document_title, subtitle=metadata.subtitle,
        )

    sentences = tuple(
        _span_of(_attrs(el), n, "Sentence") for el in by_local.get("Sentence", [])
    )

    lemmas: list[Lemma] = []
    lemma_index: dict[str, int] = {}
    for el in by_local.get("Lemma", []):
        attrs = _attrs(el)
        lemma_index[attrs.get("id", "")] = len(lemmas)
        lemmas.append(Lemma(span=_span_of(attrs, n, "Lemma"), value=attrs.get("value", "")))
    pos_tags: list[PosTag] = []
    pos_index: dict[str, int] = {}
    for el in by_local.get("PosTag", []):
        attrs = _attrs(el)
        pos_index[attrs.get("id", "")] = len(pos_tags)
        pos_tags.append(PosTag(span=_span_of(attrs, n, "PosTag"), value=attrs.get("value", "")))
    morphs: list[MorphFeatures] = []
    morph_index: dict[str, int] = {}
    for el in by_local.get("MorphologicalFeatures", []):
        attrs = _attrs(el)
        morph_index[attrs.get("id", "")] = len(morphs)
        span = _span_of(attrs, n, "MorphologicalFeatures")
        morphs.append(
            MorphFeatures.from_features(span, parse_feature_string(attrs.get("value", "")))
        )

    def resolve(ref: str | None, index: dict[str, int], what: str) -> int | None:
        if ref is None:
            return None
        if ref not in index:
            raise DanglingReferenceError(f"{what} references missing xmi:id {ref}")
        return index[ref]

    tokens: list[Token] = []
    token_index: dict[str, int] = {}
    for el in by_local.get("Token", []):
        attrs = _attrs(el)
        token_index[attrs.get("id", "")] = len(tokens)
        tokens.append(
            Token(
                span=_span_of(attrs, n, "Token"),
                order=int(attrs.get("order", "0")),
                lemma_ref=resolve(attrs.get("lemma"), lemma_index, "Token lemma"),
                pos_ref=resolve(attrs.get("pos"), pos_index, "Token pos"),
                morph_ref=resolve(attrs.get("morph"), morph_index, "Token morph"),
            )
        )

    dependencies: list[Dependency] = []
    for el in by_local.get("Dependency", []):
        attrs = _attrs(el)
        span = _span_of(attrs, n, "Dependency")
        gov = resolve(attrs.get("Governor"), token_index, "Dependency Governor")
        dep = resolve(attrs.get("Dependent"), token_index, "Dependency Dependent")
        if gov is None or dep is None:
            raise MalformedXmiError("Dependency without Governor/Dependent")
        dependencies.append(
            Dependency(
                span=span,
                governor=gov,
                dependent=dep,
                dependency_type=attrs.get("DependencyType", ""),
                flavor=attrs.get("flavor", "basic"),
            )
        )

    entities = tuple(
        NamedEntity(
            span=_span_of(_attrs(el), n, "NamedEntity"),
            label=_attrs(el).get("value", ""),
        )
        for el in by_local.get("NamedEntity", [])
    )

    doc = AnnotatedDocument(
        document_id=document_id,
        sofa=sofa,
        sentences=sentences,
        tokens=tuple(tokens),
        lemmas=tuple(lemmas),
        pos_tags=tuple(pos_tags),
        morph=tuple(morphs),
        dependencies=tuple(dependencies),
        entities=entities,
        metadata=metadata,
        provenance=provenance,
        script=script,
    )
    try:
        validate_document(doc)
    except DocumentInvariantError as exc:
        raise MalformedXmiError(str(exc)) from exc
    return doc


def read_xmi(path) -> AnnotatedDocument:
    """Inverse of write_xmi: read_xmi(write_xmi(d)) == d, layer for layer."""
    return read_xmi_bytes(Path(path).read_bytes())


def read_document_facts(path) -> dict:
    """Cheap scan of one packaged file for filters and statistics."""
    doc = read_xmi(path)
    return {
        "document_id": doc.document_id,
        "provenance": doc.provenance,
        "script": doc.script,
        "sentences": len(doc.sentences),
        "tokens": len(doc.tokens),
    }
