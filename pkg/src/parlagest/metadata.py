"""Session metadata: protocol date, legislature/session subtitle, timestamp.

Dates are looked for in the filename first (`…_<L>_<S>_DD.MM.YYYY…`), then
in the first page of text (`DD.MM.YYYY` or `D. <Monat> YYYY`). The session
timestamp is UTC midnight of the protocol date in milliseconds.
"""

from __future__ import annotations

import calendar
import datetime
import re
from dataclasses import dataclass

MS_PER_DAY = 86_400_000

GERMAN_MONTHS = {
    "januar": 1,
    "jänner": 1,  # Austrian protocols
    "februar": 2,
    "märz": 3,
    "april": 4,
    "mai": 5,
    "juni": 6,
    "juli": 7,
    "august": 8,
    "september": 9,
    "oktober": 10,
    "november": 11,
    "dezember": 12,
}

_FILENAME_RE = re.compile(r"_(\d+)_(\d+)_(\d{1,2})\.(\d{1,2})\.(\d{4})")
_NUMERIC_DATE_RE = re.compile(r"(?<![\d.])(\d{1,2})\.(\d{1,2})\.(\d{4})(?!\d)")
_MONTH_NAME_RE = re.compile(
    r"(?<!\d)(\d{1,2})\.\s+(" + "|".join(GERMAN_MONTHS) + r")\s+(\d{4})",
    re.IGNORECASE,
)
_LEGISLATURE_RE = re.compile(r"(\d+)\.\s*Wahlperiode")
_SESSION_RE = re.compile(r"(\d+)\.\s*Sitzung")


class MetadataMissingError(Exception):
    """No protocol date found; the document is packaged with a sentinel."""

    def __init__(self, document_id: str):
        self.document_id = document_id
        super().__init__(f"{document_id}: no protocol date found")


def timestamp_for_date(day: int, month: int, year: int) -> int:
    """Milliseconds since the epoch at UTC midnight of the given date."""
    datetime.date(year, month, day)  # raises ValueError on bad dates
    return calendar.timegm((year, month, day, 0, 0, 0)) * 1000


def date_from_timestamp(timestamp_ms: int) -> tuple[int, int, int]:
    dt = datetime.datetime.fromtimestamp(timestamp_ms / 1000, tz=datetime.timezone.utc)
    return dt.day, dt.month, dt.year


@dataclass(frozen=True)
class SessionMetadata:
    title: str
    subtitle: str  # "<L>.Wahlperiode__<S>.Sitzung" or "" when unknown
    date_day: int
    date_month: int
    date_year: int
    timestamp_ms: int

    def __post_init__(self):
        expected = timestamp_for_date(self.date_day, self.date_month, self.date_year)
        if self.timestamp_ms != expected:
            raise ValueError(
                f"timestamp {self.timestamp_ms} != UTC midnight {expected} of "
                f"{self.date_day:02d}.{self.date_month:02d}.{self.date_year}"
            )

    @classmethod
    def for_date(
        cls, day: int, month: int, year: int, title: str = "", subtitle: str = ""
    ) -> "SessionMetadata":
        return cls(
            title=title,
            subtitle=subtitle,
            date_day=day,
            date_month=month,
            date_year=year,
            timestamp_ms=timestamp_for_date(day, month, year),
        )


@dataclass(frozen=True)
class DocumentMetaData:
    language: str = "de"
    document_title: str = ""
    document_id: str = ""
    document_uri: str = ""
    document_base_uri: str = ""
    is_last_segment: bool = False

    def __post_init__(self):
        if self.document_uri and self.document_base_uri:
            if not self.document_uri.startswith(self.document_base_uri):
                raise ValueError(
                    f"documentUri {self.document_uri!r} does not start with "
                    f"documentBaseUri {self.document_base_uri!r}"
                )


def _valid_date(day: int, month: int, year: int) -> bool:
    try:
        datetime.date(year, month, day)
    except ValueError:
        return False
    return True


def _date_from_text(text: str) -> tuple[int, int, int] | None:
    """Earliest calendar-valid date in numeric or month-name form."""
    candidates: list[tuple[int, int, int, int]] = []
    for m in _NUMERIC_DATE_RE.finditer(text):
        day, month, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if _valid_date(day, month, year):
            candidates.append((m.start(), day, month, year))
            break
    for m in _MONTH_NAME_RE.finditer(text):
        day = int(m.group(1))
        month = GERMAN_MONTHS[m.group(2).lower()]
        year = int(m.group(3))
        if _valid_date(day, month, year):
            candidates.append((m.start(), day, month, year))
            break
    if not candidates:
        return None
    _, day, month, year = min(candidates)
    return day, month, year


def extract_metadata(doc_text: str, filename: str, parliament: str) -> SessionMetadata:
    """Session metadata from the filename pattern or the first page text."""
    legislature: int | None = None
    session: int | None = None
    date: tuple[int, int, int] | None = None

    m = _FILENAME_RE.search(filename)
    if m:
        legislature, session = int(m.group(1)), int(m.group(2))
        day, month, year = int(m.group(3)), int(m.group(4)), int(m.group(5))
        if _valid_date(day, month, year):
            date = (day, month, year)

    first_page = doc_text.split("\f", 1)[0]
    if date is None:
        date = _date_from_text(first_page)
    if legislature is None:
        lm = _LEGISLATURE_RE.search(first_page)
        sm = _SESSION_RE.search(first_page)
        if lm and sm:
            legislature, session = int(lm.group(1)), int(sm.group(1))
    if date is None:
        raise MetadataMissingError(filename)

    day, month, year = date
    subtitle = ""
    if legislature is not None and session is not None:
        subtitle = f"{legislature}.Wahlperiode__{session}.Sitzung"
    title = f"{parliament}-Plenarprotokoll vom {day:02d}.{month:02d}.{year}"
    return SessionMetadata.for_date(day, month, year, title=title, subtitle=subtitle)


def legislature_from_subtitle(subtitle: str) -> str | None:
    """The `<L>` of `<L>.Wahlperiode__<S>.Sitzung`, or None."""
    m = re.match(r"(\d+)\.Wahlperiode__", subtitle or "")
    return m.group(1) if m else None
