"""Offset-based annotation layers over a sofa text.

Native capabilities: text extraction from readable PDFs, normalization,
sentence and token segmentation. Richer layers (lemma, PoS, morphology,
dependencies, entities) come from a sidecar payload and are re-linked to
tokens by exact span match. All offsets count Unicode scalar values.
"""

from __future__ import annotations

import hashlib
import logging
import re
import unicodedata
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from . import pdfio
from .manifest import DocumentRecord
from .metadata import SessionMetadata

log = logging.getLogger(__name__)

ROOT_DEPENDENCY_TYPES = frozenset({"ROOT", "root", "--"})
_OPENING_QUOTES = "\"'„‚«»‹›([{"
_TOKEN_RE = re.compile(r"\w+(?:[-'’]\w+)*|\S")
_SENTENCE_TERMINALS = frozenset(".?!")


class ExtractionError(Exception):
    def __init__(self, document_id: str, cause: str):
        self.document_id = document_id
        super().__init__(f"{document_id}: {cause}")


class DocumentInvariantError(Exception):
    """An AnnotatedDocument invariant does not hold; names the invariant."""


class PayloadError(Exception):
    """Sidecar payload rejected; message names the first offending item."""


@dataclass(frozen=True)
class Span:
    begin: int
    end: int

    def __post_init__(self):
        if self.begin > self.end:
            raise ValueError(f"span begin {self.begin} > end {self.end}")


@dataclass(frozen=True)
class Token:
    span: Span
    order: int = 0
    lemma_ref: int | None = None  # index into AnnotatedDocument.lemmas
    pos_ref: int | None = None
    morph_ref: int | None = None


@dataclass(frozen=True)
class Lemma:
    span: Span
    value: str


@dataclass(frozen=True)
class PosTag:
    span: Span
    value: str


def parse_feature_string(value: str) -> dict[str, str]:
    """Parse a `Key=Val|Key=Val` morphology string into a mapping."""
    features: dict[str, str] = {}
    if not value:
        return features
    for part in value.split("|"):
        if "=" not in part:
            raise ValueError(f"bad morphology item {part!r} in {value!r}")
        key, val = part.split("=", 1)
        features[key] = val
    return features


def feature_string(features: dict[str, str]) -> str:
    """Canonical `Key=Val|…` form with keys sorted."""
    return "|".join(f"{k}={features[k]}" for k in sorted(features))


@dataclass(frozen=True)
class MorphFeatures:
    span: Span
    value: str  # canonical Key=Val|… string
    gender: str | None = None
    number: str | None = None
    case: str | None = None

    @classmethod
    def from_features(cls, span: Span, features: dict[str, str]) -> "MorphFeatures":
        return cls(
            span=span,
            value=feature_string(features),
            gender=features.get("Gender"),
            number=features.get("Number"),
            case=features.get("Case"),
        )

    @property
    def features(self) -> dict[str, str]:
        return parse_feature_string(self.value)


@dataclass(frozen=True)
class Dependency:
    span: Span
    governor: int  # index into AnnotatedDocument.tokens
    dependent: int
    dependency_type: str
    flavor: str = "basic"


@dataclass(frozen=True)
class NamedEntity:
    span: Span
    label: str


@dataclass(frozen=True)
class AnnotatedDocument:
    document_id: str
    sofa: str
    sentences: tuple[Span, ...] = ()
    tokens: tuple[Token, ...] = ()
    lemmas: tuple[Lemma, ...] = ()
    pos_tags: tuple[PosTag, ...] = ()
    morph: tuple[MorphFeatures, ...] = ()
    dependencies: tuple[Dependency, ...] = ()
    entities: tuple[NamedEntity, ...] = ()
    metadata: SessionMetadata | None = None
    provenance: str = "native_text"  # native_text | ocr
    script: str = "antiqua"  # antiqua | fraktur

    def token_text(self, token: Token) -> str:
        return self.sofa[token.span.begin:token.span.end]

    def sofa_sha256(self) -> str:
        return hashlib.sha256(self.sofa.encode("utf-8")).hexdigest()


def validate_document(doc: AnnotatedDocument) -> None:
    """Check every AnnotatedDocument invariant; raise naming the violation."""
    n = len(doc.sofa)

    def check_span(span: Span, what: str):
        if not (0 <= span.begin <= span.end <= n):
            raise DocumentInvariantError(
                f"{what} span [{span.begin},{span.end}) outside sofa of length {n}"
            )

    for s in doc.sentences:
        check_span(s, "sentence")
    prev_end = -1
    for i, tok in enumerate(doc.tokens):
        check_span(tok.span, f"token {i}")
        if tok.span.begin < prev_end:
            raise DocumentInvariantError(
                f"token {i} overlaps or is out of order at {tok.span.begin}"
            )
        if tok.order < 0:
            raise DocumentInvariantError(f"token {i} has negative order")
        prev_end = tok.span.end
    for name, layer in (("lemma", doc.lemmas), ("pos tag", doc.pos_tags)):
        for i, ann in enumerate(layer):
            check_span(ann.span, f"{name} {i}")
            if not ann.value:
                raise DocumentInvariantError(f"{name} {i} has an empty value")
    for i, m in enumerate(doc.morph):
        check_span(m.span, f"morph {i}")
        features = parse_feature_string(m.value)
        for key, attr in (("Gender", m.gender), ("Number", m.number), ("Case", m.case)):
            if attr != features.get(key):
                raise DocumentInvariantError(
                    f"morph {i}: field {key}={attr!r} disagrees with value {m.value!r}"
                )
        if feature_string(features) != m.value:
            raise DocumentInvariantError(
                f"morph {i}: value {m.value!r} is not in canonical sorted form"
            )
    for i, e in enumerate(doc.entities):
        check_span(e.span, f"entity {i}")
        if not e.label:
            raise DocumentInvariantError(f"entity {i} has an empty label")
    for i, tok in enumerate(doc.tokens):
        for ref, layer, name in (
            (tok.lemma_ref, doc.lemmas, "lemma"),
            (tok.pos_ref, doc.pos_tags, "pos"),
            (tok.morph_ref, doc.morph, "morph"),
        ):
            if ref is None:
                continue
            if not (0 <= ref < len(layer)):
                raise DocumentInvariantError(f"token {i} references missing {name} {ref}")
            if layer[ref].span != tok.span:
                raise DocumentInvariantError(
                    f"token {i} references {name} {ref} with a different span"
                )
    for i, dep in enumerate(doc.dependencies):
        check_span(dep.span, f"dependency {i}")
        for role, ref in (("governor", dep.governor), ("dependent", dep.dependent)):
            if not (0 <= ref < len(doc.tokens)):
                raise DocumentInvariantError(
                    f"dependency {i} {role} references missing token {ref}"
                )
        if dep.governor == dep.dependent and dep.dependency_type not in ROOT_DEPENDENCY_TYPES:
            raise DocumentInvariantError(
                f"dependency {i} is reflexive without a root convention type"
            )
    for name, layer in (("lemmas", doc.lemmas), ("pos_tags", doc.pos_tags)):
        if layer and len(layer) != len(doc.tokens):
            raise DocumentInvariantError(
                f"{name} layer present with {len(layer)} entries for "
                f"{len(doc.tokens)} tokens"
            )
    if doc.provenance not in ("native_text", "ocr"):
        raise DocumentInvariantError(f"bad provenance {doc.provenance!r}")
    if doc.script not in ("antiqua", "fraktur"):
        raise DocumentInvariantError(f"bad script {doc.script!r}")


# -- data files ---------------------------------------------------------


def _load_wordlist(name: str, extra_path: Path | None = None) -> frozenset[str]:
    words: set[str] = set()
    text = resources.files("parlagest.data").joinpath(name).read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    if extra_path is not None:
        for line in Path(extra_path).read_text("utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


def default_abbreviations(extra_path: Path | None = None) -> frozenset[str]:
    """Shipped German abbreviation list, extensible via a config file."""
    return _load_wordlist("abbreviations_de.txt", extra_path)


def protected_hyphenations(extra_path: Path | None = None) -> frozenset[str]:
    return frozenset(
        w.lower() for w in _load_wordlist("hyphenated_names_de.txt", extra_path)
    )


# -- text operations ----------------------------------------------------


def normalize_text(raw: str) -> str:
    """NFC, CRLF to LF, control characters other than LF and FF removed."""
    text = raw.replace("\r\n", "\n")
    text = unicodedata.normalize("NFC", text)
    return "".join(
        ch for ch in text
        if ch in "\n\f" or unicodedata.category(ch) != "Cc"
    )


_HYPHEN_BREAK_RE = re.compile(r"(\w+)-\n(\w+)")


def dehyphenate(text: str, protected: frozenset[str] | None = None) -> str:
    """Rejoin words hyphenated at line breaks.

    `Bundes-\\nregierung` becomes `Bundesregierung`; forms in the protected
    hyphenated-names lexicon keep their hyphen (`Baden-Württemberg`).
    Non-alphabetic fragments are left untouched.
    """
    if protected is None:
        protected = protected_hyphenations()

    def join(m: re.Match) -> str:
        left, right = m.group(1), m.group(2)
        if not (left.isalpha() and right.isalpha()):
            return m.group(0)
        hyphenated = f"{left}-{right}"
        if hyphenated.lower() in protected:
            return hyphenated
        return left + right

    return _HYPHEN_BREAK_RE.sub(join, text)


def extract_native_text(
    record: DocumentRecord, protected: frozenset[str] | None = None
) -> str:
    """Text of a readable PDF, page breaks as form-feeds, dehyphenated."""
    if record.classification != "readable":
        raise ValueError(f"{record.id}: native extraction requires a readable document")
    try:
        texts = pdfio.page_texts(record.local_path)
    except (pdfio.PdfError, OSError) as exc:
        raise ExtractionError(record.id, str(exc)) from exc
    return dehyphenate("\f".join(texts), protected)


def segment(
    text: str, abbreviations: frozenset[str] | None = None
) -> tuple[tuple[Span, ...], tuple[Token, ...]]:
    """Sentence and token spans over normalized text.

    Tokens partition the non-whitespace content. A sentence ends at `.?!`
    followed by whitespace and an uppercase letter or opening quote, unless
    the terminal closes an abbreviation from the shipped list.
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    tokens = tuple(
        Token(span=Span(m.start(), m.end()), order=i)
        for i, m in enumerate(_TOKEN_RE.finditer(text))
    )
    if not tokens:
        return (), ()

    def is_boundary(i: int) -> bool:
        tok = tokens[i]
        terminal = text[tok.span.begin:tok.span.end]
        if terminal not in _SENTENCE_TERMINALS:
            return False
        j = tok.span.end
        if j >= len(text) or not text[j].isspace():
            return False
        k = j
        while k < len(text) and text[k].isspace():
            k += 1
        if k >= len(text) or not (text[k].isupper() or text[k] in _OPENING_QUOTES):
            return False
        if terminal == "." and i > 0:
            prev = tokens[i - 1]
            if prev.span.end == tok.span.begin:
                if text[prev.span.begin:tok.span.end] in abbreviations:
                    return False
        return True

    sentences: list[Span] = []
    start = 0
    for i in range(len(tokens)):
        if is_boundary(i):
            sentences.append(Span(tokens[start].span.begin, tokens[i].span.end))
            start = i + 1
    if start < len(tokens):
        sentences.append(Span(tokens[start].span.begin, tokens[-1].span.end))
    return tuple(sentences), tokens


# -- sidecar payload attachment ------------------------------------------


def _payload_span(item: dict, what: str, sofa_len: int) -> Span:
    try:
        begin, end = int(item["begin"]), int(item["end"])
    except (KeyError, TypeError, ValueError):
        raise PayloadError(f"{what}: missing or non-integer begin/end in {item!r}")
    if not (0 <= begin <= end <= sofa_len):
        raise PayloadError(
            f"{what}: span [{begin},{end}) outside sofa of length {sofa_len}"
        )
    return Span(begin, end)


def attach_external_annotations(
    doc: AnnotatedDocument,
    payload: dict,
    replace_segmentation: bool = False,
) -> AnnotatedDocument:
    """Replace the rich layers of `doc` with the sidecar payload layers.

    Token references are re-linked by exact (begin, end) match. The payload
    must name the same document and carry the sofa's SHA-256; any offset out
    of range or unmatched token reference rejects the whole payload.
    """
    if payload.get("document_id") != doc.document_id:
        raise PayloadError(
            f"payload is for {payload.get('document_id')!r}, not {doc.document_id!r}"
        )
    expected = doc.sofa_sha256()
    if payload.get("sofa_sha256") != expected:
        raise PayloadError(
            f"sofa hash mismatch: payload {payload.get('sofa_sha256')!r} != {expected}"
        )
    layers = payload.get("layers", {})
    n = len(doc.sofa)
    if not any(layers.get(k) for k in
               ("sentences", "tokens", "lemmas", "pos", "morph", "dependencies", "entities")):
        log.info("%s: payload has no layers, document unchanged", doc.document_id)
        return doc

    sentences = doc.sentences
    tokens = doc.tokens
    if replace_segmentation:
        if layers.get("sentences"):
            sentences = tuple(
                _payload_span(it, "sentence", n) for it in layers["sentences"]
            )
        if layers.get("tokens"):
            spans = sorted(
                (_payload_span(it, "token", n) for it in layers["tokens"]),
                key=lambda s: (s.begin, s.end),
            )
            tokens = tuple(Token(span=s, order=i) for i, s in enumerate(spans))

    token_index = {(t.span.begin, t.span.end): i for i, t in enumerate(tokens)}

    def token_for(span: Span, what: str) -> int:
        key = (span.begin, span.end)
        if key not in token_index:
            raise PayloadError(f"{what} at [{span.begin},{span.end}) matches no token")
        return token_index[key]

    lemmas: list[Lemma] = []
    pos_tags: list[PosTag] = []
    morphs: list[MorphFeatures] = []
    lemma_of: dict[int, int] = {}
    pos_of: dict[int, int] = {}
    morph_of: dict[int, int] = {}

    for item in layers.get("lemmas", []):
        span = _payload_span(item, "lemma", n)
        value = item.get("value", "")
        if not value:
            raise PayloadError(f"lemma at [{span.begin},{span.end}) has an empty value")
        lemma_of[token_for(span, "lemma")] = len(lemmas)
        lemmas.append(Lemma(span=span, value=value))
    for item in layers.get("pos", []):
        span = _payload_span(item, "pos tag", n)
        value = item.get("value", "")
        if not value:
            raise PayloadError(f"pos tag at [{span.begin},{span.end}) has an empty value")
        pos_of[token_for(span, "pos tag")] = len(pos_tags)
        pos_tags.append(PosTag(span=span, value=value))
    for item in layers.get("morph", []):
        span = _payload_span(item, "morphology", n)
        features = item.get("features")
        if features is None:
            features = parse_feature_string(item.get("value", ""))
        morph_of[token_for(span, "morphology")] = len(morphs)
        morphs.append(MorphFeatures.from_features(span, dict(features)))

    dependencies: list[Dependency] = []
    for item in layers.get("dependencies", []):
        span = _payload_span(item, "dependency", n)
        try:
            gov = Span(*(int(v) for v in item["governor"]))
            dep = Span(*(int(v) for v in item["dependent"]))
        except (KeyError, TypeError, ValueError):
            raise PayloadError(f"dependency at [{span.begin},{span.end}) has bad endpoints")
        dependencies.append(
            Dependency(
                span=span,
                governor=token_for(gov, "dependency governor"),
                dependent=token_for(dep, "dependency dependent"),
                dependency_type=item.get("type", ""),
                flavor=item.get("flavor", "basic"),
            )
        )

    entities: list[NamedEntity] = []
    for item in layers.get("entities", []):
        span = _payload_span(item, "entity", n)
        label = item.get("label", "")
        if not label:
            raise PayloadError(f"entity at [{span.begin},{span.end}) has an empty label")
        entities.append(NamedEntity(span=span, label=label))

    new_tokens = tuple(
        replace(
            tok,
            lemma_ref=lemma_of.get(i),
            pos_ref=pos_of.get(i),
            morph_ref=morph_of.get(i),
        )
        for i, tok in enumerate(tokens)
    )
    result = replace(
        doc,
        sentences=sentences,
        tokens=new_tokens,
        lemmas=tuple(lemmas),
        pos_tags=tuple(pos_tags),
        morph=tuple(morphs),
        dependencies=tuple(dependencies),
        entities=tuple(entities),
    )
    validate_document(result)
    return result


def native_layers_payload(doc: AnnotatedDocument) -> dict:
    """Serialize a document's layers in the sidecar interchange schema."""
    return {
        "document_id": doc.document_id,
        "sofa_sha256": doc.sofa_sha256(),
        "layers": {
            "sentences": [{"begin": s.begin, "end": s.end} for s in doc.sentences],
            "tokens": [{"begin": t.span.begin, "end": t.span.end} for t in doc.tokens],
            "lemmas": [
                {"begin": l.span.begin, "end": l.span.end, "value": l.value}
                for l in doc.lemmas
            ],
            "pos": [
                {"begin": p.span.begin, "end": p.span.end, "value": p.value}
                for p in doc.pos_tags
            ],
            "morph": [
                {
                    "begin": m.span.begin,
                    "end": m.span.end,
                    "features": m.features,
                    "value": m.value,
                }
                for m in doc.morph
            ],
            "dependencies": [
                {
                    "begin": d.span.begin,
                    "end": d.span.end,
                    "governor": [
                        doc.tokens[d.governor].span.begin,
                        doc.tokens[d.governor].span.end,
                    ],
                    "dependent": [
                        doc.tokens[d.dependent].span.begin,
                        doc.tokens[d.dependent].span.end,
                    ],
                    "type": d.dependency_type,
                    "flavor": d.flavor,
                }
                for d in doc.dependencies
            ],
            "entities": [
                {"begin": e.span.begin, "end": e.span.end, "label": e.label}
                for e in doc.entities
            ],
        },
    }
