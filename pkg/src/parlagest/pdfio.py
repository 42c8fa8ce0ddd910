"""Minimal PDF reader for the document classes this pipeline ingests.

Supports the common structure of born-digital protocol PDFs and image-only
scan PDFs: classic and object-stream layouts, Flate/ASCII85/ASCIIHex/DCT
filters, page-tree traversal with attribute inheritance, text extraction
from Tj/TJ/'/" operators (WinAnsi/MacRoman simple fonts), and extraction
of page image XObjects. CID/Type0 fonts, encryption, JPX images and
predictor-coded streams are out of scope and raise PdfError.
"""

from __future__ import annotations

import base64
import binascii
import io
import re
import zlib

import numpy as np
from PIL import Image


class PdfError(Exception):
    """File is not a PDF this reader understands."""


_WS = b"\x00\t\n\x0c\r "
_DELIM = b"()<>[]{}/%"

# escape table for literal strings
_STRING_ESCAPES = {
    ord("n"): b"\n",
    ord("r"): b"\r",
    ord("t"): b"\t",
    ord("b"): b"\b",
    ord("f"): b"\x0c",
    ord("("): b"(",
    ord(")"): b")",
    ord("\\"): b"\\",
}

_ENCODINGS = {
    "WinAnsiEncoding": "cp1252",
    "MacRomanEncoding": "mac_roman",
    "StandardEncoding": "latin-1",
    "PDFDocEncoding": "latin-1",
}

class Name(str):
    """A PDF name token; distinct from string objects."""

    __slots__ = ()


class Ref:
    """Indirect object reference."""

    __slots__ = ("num", "gen")

    def __init__(self, num: int, gen: int):
        self.num = num
        self.gen = gen

    def __repr__(self):
        return f"Ref({self.num}, {self.gen})"

    def __eq__(self, other):
        return isinstance(other, Ref) and (self.num, self.gen) == (other.num, other.gen)

    def __hash__(self):
        return hash((self.num, self.gen))


class _Lexer:
    """Token-level parser over raw PDF bytes."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c in _WS:
                self.pos += 1
            elif c == 0x25:  # '%' comment to end of line
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.data)

    def peek(self) -> int:
        return self.data[self.pos] if self.pos < len(self.data) else -1

    def read_keyword(self) -> str:
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in _WS and data[self.pos] not in _DELIM:
            self.pos += 1
        return data[start:self.pos].decode("latin-1")

    def parse_object(self):
        """Parse one PDF object (not an operator) at the current position."""
        self.skip_ws()
        if self.pos >= len(self.data):
            raise PdfError("unexpected end of data")
        c = self.data[self.pos]
        if c == ord("<"):
            if self.data[self.pos + 1:self.pos + 2] == b"<":
                return self._parse_dict()
            return self._parse_hex_string()
        if c == ord("("):
            return self._parse_literal_string()
        if c == ord("/"):
            return self._parse_name()
        if c == ord("["):
            return self._parse_array()
        if c in b"0123456789+-.":
            return self._parse_number_or_ref()
        kw = self.read_keyword()
        if kw == "true":
            return True
        if kw == "false":
            return False
        if kw == "null":
            return None
        if not kw:
            raise PdfError(f"unparsable byte 0x{c:02x} at offset {self.pos}")
        raise PdfError(f"unexpected keyword {kw!r} at offset {self.pos}")

    def _parse_name(self) -> Name:
        self.pos += 1  # '/'
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in _WS and data[self.pos] not in _DELIM:
            self.pos += 1
        raw = data[start:self.pos]
        if b"#" in raw:
            raw = re.sub(rb"#([0-9A-Fa-f]{2})", lambda m: bytes([int(m.group(1), 16)]), raw)
        return Name(raw.decode("latin-1"))

    def _parse_number_or_ref(self):
        num = self._parse_number()
        if isinstance(num, int) and num >= 0:
            save = self.pos
            self.skip_ws()
            if self.pos < len(self.data) and self.data[self.pos] in b"0123456789":
                gen_start = self.pos
                try:
                    gen = self._parse_number()
                except PdfError:
                    gen = None
                if isinstance(gen, int):
                    self.skip_ws()
                    kw_start = self.pos
                    kw = self.read_keyword()
                    if kw == "R":
                        return Ref(num, gen)
                    self.pos = kw_start
                self.pos = gen_start
            self.pos = save
        return num

    def _parse_number(self):
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] in b"0123456789+-.eE":
            self.pos += 1
        text = data[start:self.pos].decode("latin-1")
        try:
            if "." in text or "e" in text or "E" in text:
                return float(text)
            return int(text)
        except ValueError as exc:
            raise PdfError(f"bad number {text!r} at offset {start}") from exc

    def _parse_literal_string(self) -> bytes:
        self.pos += 1  # '('
        out = bytearray()
        depth = 1
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c == ord("\\"):
                self.pos += 1
                e = data[self.pos] if self.pos < n else -1
                if e in _STRING_ESCAPES:
                    out += _STRING_ESCAPES[e]
                    self.pos += 1
                elif e in b"01234567":
                    oct_digits = bytearray()
                    while self.pos < n and len(oct_digits) < 3 and data[self.pos] in b"01234567":
                        oct_digits.append(data[self.pos])
                        self.pos += 1
                    out.append(int(oct_digits.decode(), 8) & 0xFF)
                elif e in b"\r\n":  # line continuation
                    if data[self.pos:self.pos + 2] == b"\r\n":
                        self.pos += 2
                    else:
                        self.pos += 1
                else:
                    out.append(e)
                    self.pos += 1
            elif c == ord("("):
                depth += 1
                out.append(c)
                self.pos += 1
            elif c == ord(")"):
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return bytes(out)
                out.append(c)
                self.pos += 1
            elif c == ord("\r"):
                # raw EOL inside a string is recorded as \n
                out.append(ord("\n"))
                self.pos += 2 if data[self.pos:self.pos + 2] == b"\r\n" else 1
            else:
                out.append(c)
                self.pos += 1
        raise PdfError("unterminated string")

    def _parse_hex_string(self) -> bytes:
        self.pos += 1  # '<'
        end = self.data.find(b">", self.pos)
        if end < 0:
            raise PdfError("unterminated hex string")
        digits = re.sub(rb"\s", b"", self.data[self.pos:end])
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        try:
            return binascii.unhexlify(digits)
        except binascii.Error as exc:
            raise PdfError("bad hex string") from exc

    def _parse_array(self) -> list:
        self.pos += 1  # '['
        items = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.data):
                raise PdfError("unterminated array")
            if self.data[self.pos] == ord("]"):
                self.pos += 1
                return items
            items.append(self.parse_object())

    def _parse_dict(self) -> dict:
        self.pos += 2  # '<<'
        out = {}
        while True:
            self.skip_ws()
            if self.data[self.pos:self.pos + 2] == b">>":
                self.pos += 2
                return out
            if self.pos >= len(self.data):
                raise PdfError("unterminated dictionary")
            key = self.parse_object()
            if not isinstance(key, Name):
                raise PdfError(f"dictionary key is not a name: {key!r}")
            out[str(key)] = self.parse_object()


def _apply_filters(data: bytes, filters, parms) -> tuple[bytes, list[str]]:
    """Apply decode filters; returns (data, remaining) where remaining holds
    image codecs (DCTDecode etc.) that must be handled by an image decoder."""
    if filters is None:
        return data, []
    if isinstance(filters, (Name, str)):
        filters = [filters]
    if parms is None:
        parms = [None] * len(filters)
    elif isinstance(parms, dict):
        parms = [parms]
    for i, f in enumerate(filters):
        f = str(f)
        parm = parms[i] if i < len(parms) else None
        if isinstance(parm, dict) and parm.get("Predictor", 1) not in (None, 1):
            raise PdfError(f"predictor-coded {f} streams are not supported")
        if f == "FlateDecode":
            try:
                data = zlib.decompress(data)
            except zlib.error as exc:
                raise PdfError("corrupt FlateDecode stream") from exc
        elif f == "ASCII85Decode":
            body = re.sub(rb"\s", b"", data)
            if body.endswith(b"~>"):
                body = body[:-2]
            try:
                data = base64.a85decode(body)
            except ValueError as exc:
                raise PdfError("corrupt ASCII85 stream") from exc
        elif f == "ASCIIHexDecode":
            body = re.sub(rb"\s", b"", data).rstrip(b">")
            if len(body) % 2:
                body += b"0"
            data = binascii.unhexlify(body)
        elif f in ("DCTDecode", "JPXDecode", "CCITTFaxDecode", "JBIG2Decode"):
            return data, [str(x) for x in filters[i:]]
        else:
            raise PdfError(f"unsupported stream filter {f}")
    return data, []


class PdfStream:
    __slots__ = ("dictionary", "raw")

    def __init__(self, dictionary: dict, raw: bytes):
        self.dictionary = dictionary
        self.raw = raw

    def decoded(self, doc: "PdfDocument") -> bytes:
        data, remaining = _apply_filters(
            self.raw,
            doc.resolve(self.dictionary.get("Filter")),
            doc.resolve(self.dictionary.get("DecodeParms")),
        )
        if remaining:
            raise PdfError(f"stream still encoded with {remaining[0]}")
        return data


class PdfDocument:
    """A parsed PDF: object map plus page list."""

    def __init__(self, data: bytes):
        if not data.startswith(b"%PDF-"):
            # a BOM or junk prefix before the header is tolerated within 1 KiB
            idx = data.find(b"%PDF-", 0, 1024)
            if idx < 0:
                raise PdfError("missing %PDF header")
            data = data[idx:]
        self.data = data
        # offsets keep every candidate per object number: binary stream data
        # can contain object-header look-alikes, so resolution tries the
        # latest candidate first and falls back on parse failure
        self._offsets: dict[int, list[int]] = {}
        self._cache: dict[int, object] = {}
        for m in re.finditer(rb"(?:^|[\r\n\x00\t\x0c ])(\d+)\s+(\d+)\s+obj\b", data):
            self._offsets.setdefault(int(m.group(1)), []).append(m.start(1))
        if not self._offsets:
            raise PdfError("no indirect objects found")
        if self._trailer_value("Encrypt") is not None:
            raise PdfError("encrypted PDFs are not supported")
        self._load_object_streams()
        self._pages = self._collect_pages()

    @classmethod
    def from_path(cls, path) -> "PdfDocument":
        with open(path, "rb") as fh:
            return cls(fh.read())

    # -- object access -------------------------------------------------

    def object(self, num: int):
        if num in self._cache:
            return self._cache[num]
        if num not in self._offsets:
            raise PdfError(f"missing object {num}")
        error: PdfError | None = None
        for offset in reversed(self._offsets[num]):
            try:
                value = self._parse_object_at(num, offset)
            except PdfError as exc:
                error = exc
                continue
            self._cache[num] = value
            return value
        raise error or PdfError(f"object {num}: no parsable definition")

    def _parse_object_at(self, num: int, offset: int):
        lex = _Lexer(self.data, offset)
        lex._parse_number()  # obj number
        lex.skip_ws()
        lex._parse_number()  # generation
        lex.skip_ws()
        if lex.read_keyword() != "obj":
            raise PdfError(f"object {num}: malformed header")
        value = lex.parse_object()
        lex.skip_ws()
        kw_start = lex.pos
        kw = lex.read_keyword()
        if kw == "stream":
            value = self._read_stream(value, lex)
        else:
            lex.pos = kw_start
        return value

    def _read_stream(self, dictionary, lex: _Lexer) -> PdfStream:
        data = self.data
        pos = lex.pos
        if data[pos:pos + 2] == b"\r\n":
            pos += 2
        elif data[pos:pos + 1] in (b"\n", b"\r"):
            pos += 1
        length = self.resolve(dictionary.get("Length"))
        raw = None
        if isinstance(length, int) and length >= 0:
            candidate = data[pos:pos + length]
            tail = data[pos + length:pos + length + 20]
            if re.match(rb"\s*endstream", tail):
                raw = candidate
        if raw is None:  # untrustworthy /Length; scan for the terminator
            end = data.find(b"endstream", pos)
            if end < 0:
                raise PdfError("unterminated stream")
            raw = data[pos:end].rstrip(b"\r\n")
        return PdfStream(dictionary, raw)

    def resolve(self, obj):
        seen = 0
        while isinstance(obj, Ref):
            obj = self.object(obj.num)
            seen += 1
            if seen > 32:
                raise PdfError("reference loop")
        return obj

    def _load_object_streams(self):
        """Expand /ObjStm containers so their objects resolve like any other."""
        for num in list(self._offsets):
            try:
                obj = self.object(num)
            except PdfError:
                continue
            if not (isinstance(obj, PdfStream) and str(obj.dictionary.get("Type", "")) == "ObjStm"):
                continue
            try:
                payload = obj.decoded(self)
                count = self.resolve(obj.dictionary.get("N"))
                first = self.resolve(obj.dictionary.get("First"))
                header = _Lexer(payload[:first])
                pairs = []
                for _ in range(int(count)):
                    onum = header.parse_object()
                    ooff = header.parse_object()
                    pairs.append((int(onum), int(ooff)))
                for onum, ooff in pairs:
                    if onum in self._cache:
                        continue
                    inner = _Lexer(payload, first + ooff)
                    self._cache[onum] = inner.parse_object()
            except (PdfError, ValueError, TypeError):
                continue

    def _trailer_value(self, key: str):
        for m in re.finditer(rb"trailer\b", self.data):
            lex = _Lexer(self.data, m.end())
            try:
                trailer = lex.parse_object()
            except PdfError:
                continue
            if isinstance(trailer, dict) and key in trailer:
                return trailer[key]
        return None

    # -- page tree -----------------------------------------------------

    def _catalog(self) -> dict:
        root = self._trailer_value("Root")
        root = self.resolve(root) if root is not None else None
        if isinstance(root, dict) and "Pages" in root:
            return root
        for num in self._offsets:
            try:
                obj = self.resolve(self.object(num))
            except PdfError:
                continue
            if isinstance(obj, dict) and str(obj.get("Type", "")) == "Catalog":
                return obj
        raise PdfError("no document catalog")

    def _collect_pages(self) -> list["PdfPage"]:
        pages: list[PdfPage] = []
        inheritable = ("Resources", "MediaBox", "CropBox", "Rotate")

        def walk(node, inherited, visiting):
            node = self.resolve(node)
            if not isinstance(node, dict):
                raise PdfError("malformed page tree node")
            nid = id(node)
            if nid in visiting:
                raise PdfError("cycle in page tree")
            merged = dict(inherited)
            for key in inheritable:
                if key in node:
                    merged[key] = node[key]
            ntype = str(node.get("Type", ""))
            if ntype == "Page" or ("Kids" not in node and ntype != "Pages"):
                pages.append(PdfPage(self, node, merged, len(pages)))
                return
            kids = self.resolve(node.get("Kids", []))
            if not isinstance(kids, list):
                raise PdfError("malformed /Kids")
            for kid in kids:
                walk(kid, merged, visiting | {nid})

        catalog = self._catalog()
        walk(catalog.get("Pages"), {}, frozenset())
        if not pages:
            raise PdfError("document has no pages")
        return pages

    @property
    def pages(self) -> list["PdfPage"]:
        return self._pages

    @property
    def page_count(self) -> int:
        return len(self._pages)


class PdfPage:
    def __init__(self, doc: PdfDocument, node: dict, inherited: dict, index: int):
        self._doc = doc
        self._node = node
        self._inherited = inherited
        self.index = index

    @property
    def media_box(self) -> tuple[float, float, float, float]:
        box = self._doc.resolve(self._inherited.get("MediaBox"))
        if not (isinstance(box, list) and len(box) == 4):
            return (0.0, 0.0, 612.0, 792.0)  # US Letter default
        x0, y0, x1, y1 = (float(self._doc.resolve(v)) for v in box)
        return (min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    @property
    def size_pt(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.media_box
        return (x1 - x0, y1 - y0)

    def _content_bytes(self) -> bytes:
        contents = self._doc.resolve(self._node.get("Contents"))
        if contents is None:
            return b""
        streams = contents if isinstance(contents, list) else [contents]
        chunks = []
        for s in streams:
            s = self._doc.resolve(s)
            if isinstance(s, PdfStream):
                chunks.append(s.decoded(self._doc))
        return b"\n".join(chunks)

    def _font_codecs(self) -> dict[str, str]:
        """Map font resource names to text codecs (subset: simple fonts)."""
        codecs: dict[str, str] = {}
        resources = self._doc.resolve(self._inherited.get("Resources")) or {}
        fonts = self._doc.resolve(resources.get("Font")) or {}
        if not isinstance(fonts, dict):
            return codecs
        for fname, fobj in fonts.items():
            codec = "cp1252"
            fdict = self._doc.resolve(fobj)
            if isinstance(fdict, dict):
                enc = self._doc.resolve(fdict.get("Encoding"))
                if isinstance(enc, dict):
                    enc = enc.get("BaseEncoding")
                if isinstance(enc, (Name, str)):
                    codec = _ENCODINGS.get(str(enc), "cp1252")
            codecs[str(fname)] = codec
        return codecs

    def extract_text(self) -> str:
        """Reconstruct the page text; Td/TD/T* line moves become newlines."""
        content = self._content_bytes()
        if not content:
            return ""
        codecs = self._font_codecs()
        lex = _Lexer(content)
        stack: list = []
        parts: list[str] = []
        codec = "cp1252"
        last_ty = None

        def newline():
            if parts and not parts[-1].endswith("\n"):
                parts.append("\n")

        def show(raw):
            if isinstance(raw, bytes):
                parts.append(raw.decode(codec, errors="replace"))

        while not lex.at_end():
            c = lex.peek()
            if c in b"0123456789+-.([</":
                try:
                    stack.append(lex.parse_object())
                except PdfError:
                    lex.pos += 1
                continue
            op = lex.read_keyword()
            if not op:
                lex.pos += 1
                continue
            if op == "Tj" and stack:
                show(stack[-1])
            elif op == "TJ" and stack and isinstance(stack[-1], list):
                for item in stack[-1]:
                    show(item)
            elif op == "'":
                newline()
                if stack:
                    show(stack[-1])
            elif op == '"':
                newline()
                if stack:
                    show(stack[-1])
            elif op in ("Td", "TD", "T*"):
                newline()
            elif op == "Tm" and len(stack) >= 6:
                ty = stack[-1]
                if last_ty is not None and ty != last_ty:
                    newline()
                last_ty = ty
            elif op == "Tf" and len(stack) >= 2:
                fname = stack[-2]
                if isinstance(fname, Name):
                    codec = codecs.get(str(fname), "cp1252")
            elif op == "ET":
                newline()
            stack.clear()
        return "".join(parts).rstrip()

    def extract_images(self) -> list[np.ndarray]:
        """Decode the page's image XObjects as uint8 arrays (gray or RGB)."""
        resources = self._doc.resolve(self._inherited.get("Resources")) or {}
        xobjects = self._doc.resolve(resources.get("XObject")) or {}
        images = []
        if not isinstance(xobjects, dict):
            return images
        for name in sorted(xobjects):
            obj = self._doc.resolve(xobjects[name])
            if not isinstance(obj, PdfStream):
                continue
            d = obj.dictionary
            if str(self._doc.resolve(d.get("Subtype", ""))) != "Image":
                continue
            if self._doc.resolve(d.get("ImageMask")) is True:
                continue
            images.append(self._decode_image(obj))
        return images

    def _decode_image(self, stream: PdfStream) -> np.ndarray:
        doc = self._doc
        d = stream.dictionary
        width = int(doc.resolve(d.get("Width")))
        height = int(doc.resolve(d.get("Height")))
        data, remaining = _apply_filters(
            stream.raw, doc.resolve(d.get("Filter")), doc.resolve(d.get("DecodeParms"))
        )
        if remaining:
            if remaining[0] != "DCTDecode" or len(remaining) > 1:
                raise PdfError(f"unsupported image codec {remaining[0]}")
            img = Image.open(io.BytesIO(data))
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            return np.asarray(img)
        bpc = int(doc.resolve(d.get("BitsPerComponent", 8)))
        cs = doc.resolve(d.get("ColorSpace"))
        palette = None
        if isinstance(cs, list) and cs and str(cs[0]) == "Indexed":
            base, _hival, lookup = (doc.resolve(v) for v in cs[1:4])
            lookup = lookup.decoded(doc) if isinstance(lookup, PdfStream) else lookup
            ncomp_base = 3 if str(base) == "DeviceRGB" else 1
            palette = np.frombuffer(lookup, np.uint8).reshape(-1, ncomp_base)
            ncomp = 1
        elif str(cs) == "DeviceRGB":
            ncomp = 3
        elif str(cs) == "DeviceGray":
            ncomp = 1
        else:
            raise PdfError(f"unsupported image color space {cs!r}")
        if bpc == 1 and ncomp == 1:
            rows = np.unpackbits(
                np.frombuffer(data, np.uint8).reshape(height, -1), axis=1
            )[:, :width]
            arr = (rows * 255).astype(np.uint8)
        elif bpc == 8:
            expected = height * width * ncomp
            buf = np.frombuffer(data[:expected], np.uint8)
            if buf.size < expected:
                raise PdfError("truncated image data")
            arr = buf.reshape((height, width) if ncomp == 1 else (height, width, ncomp))
        else:
            raise PdfError(f"unsupported image depth {bpc} bpc")
        if palette is not None:
            arr = palette[arr]
            if arr.shape[-1] == 1:
                arr = arr[..., 0]
        return arr


def page_texts(path) -> list[str]:
    """Extracted text of every page of the PDF at `path`, in page order."""
    doc = PdfDocument.from_path(path)
    return [page.extract_text() for page in doc.pages]
