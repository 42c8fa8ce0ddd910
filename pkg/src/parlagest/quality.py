"""OCR quality audit via symmetric-delete spelling correction.

Every checkable token is looked up in a frequency dictionary: a top-1
suggestion equal to the input counts as correct, a different suggestion as
wrong, no suggestion as unknown. Percentages follow the published report
layout: right/wrong/unknown over all checked tokens, `good_quality` over
correct+wrong only, `unknown_good_quality` identical to the right-words
percentage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

DEFAULT_MAX_EDIT_DISTANCE = 2
DEFAULT_PREFIX_LENGTH = 7


class DictionaryError(Exception):
    pass


def round2(value: float) -> float:
    """Round half away from zero to 2 decimals (report presentation)."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def is_checkable(token_text: str) -> bool:
    """True for all-letter tokens and letter+digit mixes; else skipped."""
    if not token_text:
        return False
    if token_text.isalpha():
        return True
    if not token_text.isalnum():
        return False
    has_alpha = any(c.isalpha() for c in token_text)
    has_digit = any(c.isdigit() for c in token_text)
    return has_alpha and has_digit


def levenshtein_within(a: str, b: str, cap: int) -> int | None:
    """Levenshtein distance if <= cap, else None. Banded DP with early exit."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if abs(la - lb) > cap:
        return None
    if la == 0 or lb == 0:
        return max(la, lb) if max(la, lb) <= cap else None
    big = cap + 1
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        lo = max(1, i - cap)
        hi = min(lb, i + cap)
        cur = [big] * (lb + 1)
        cur[0] = i if i <= cap else big
        ca = a[i - 1]
        for j in range(lo, hi + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        if min(cur[lo:hi + 1]) > cap:
            return None
        prev = cur
    return prev[lb] if prev[lb] <= cap else None


def _delete_variants(word: str, max_deletes: int) -> set[str]:
    """All strings reachable by up to max_deletes character deletions."""
    variants = {word}
    frontier = {word}
    for _ in range(max_deletes):
        next_frontier = set()
        for w in frontier:
            if not w:
                continue
            for i in range(len(w)):
                shorter = w[:i] + w[i + 1:]
                if shorter not in variants:
                    variants.add(shorter)
                    next_frontier.add(shorter)
        frontier = next_frontier
    return variants


@dataclass(frozen=True)
class Suggestion:
    word: str        # dictionary form (original casing of the best variant)
    distance: int
    frequency: int


class FrequencyDictionary:
    """Symmetric-delete index over a word-frequency list.

    Lookup is case-insensitive; a capitalization-only difference still
    counts as a distance-0 hit, so German sentence-initial capitalization
    does not inflate the wrong-word count.
    """

    def __init__(
        self,
        entries: dict[str, int],
        max_edit_distance: int = DEFAULT_MAX_EDIT_DISTANCE,
        prefix_length: int = DEFAULT_PREFIX_LENGTH,
    ):
        if max_edit_distance < 0:
            raise DictionaryError("max_edit_distance must be >= 0")
        if prefix_length < max_edit_distance + 1:
            raise DictionaryError("prefix_length must exceed max_edit_distance")
        self.max_edit_distance = max_edit_distance
        self.prefix_length = prefix_length
        self._frequency: dict[str, int] = {}
        self._display: dict[str, str] = {}
        for word, freq in entries.items():
            if not word:
                raise DictionaryError("dictionary words must be non-empty")
            if freq <= 0:
                raise DictionaryError(f"frequency for {word!r} must be > 0")
            low = word.lower()
            if low not in self._frequency or freq > self._frequency[low] or (
                freq == self._frequency[low] and word < self._display[low]
            ):
                self._display[low] = word
            self._frequency[low] = max(self._frequency.get(low, 0), freq)
        self._index: dict[str, list[str]] = {}
        for low in self._frequency:
            for key in _delete_variants(low[: self.prefix_length], max_edit_distance):
                self._index.setdefault(key, []).append(low)

    def __len__(self) -> int:
        return len(self._frequency)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._frequency

    @classmethod
    def from_file(
        cls,
        path,
        max_edit_distance: int = DEFAULT_MAX_EDIT_DISTANCE,
        prefix_length: int = DEFAULT_PREFIX_LENGTH,
    ) -> "FrequencyDictionary":
        """Load a `word<space>frequency` per line, UTF-8 dictionary file."""
        entries: dict[str, int] = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DictionaryError(f"{path}:{lineno}: expected 'word frequency'")
            try:
                freq = int(parts[1])
            except ValueError:
                raise DictionaryError(f"{path}:{lineno}: bad frequency {parts[1]!r}")
            entries[parts[0]] = max(freq, entries.get(parts[0], 0))
        return cls(entries, max_edit_distance, prefix_length)

    @classmethod
    def shipped(cls) -> "FrequencyDictionary":
        """The bundled German frequency list."""
        with resources.as_file(
            resources.files("parlagest.data").joinpath("german_frequency.txt")
        ) as path:
            return cls.from_file(path)

    def lookup(self, token_text: str) -> Suggestion | None:
        """Top-1 suggestion within max_edit_distance, or None.

        Ranking: smallest distance, then highest corpus frequency, then
        lexicographically smallest word.
        """
        query = token_text.lower()
        cap = self.max_edit_distance
        if query in self._frequency:
            # a distance-0 hit is always the unique best suggestion
            return Suggestion(
                word=self._display[query], distance=0, frequency=self._frequency[query]
            )
        best: tuple[int, int, str] | None = None
        seen: set[str] = set()
        for key in _delete_variants(query[: self.prefix_length], cap):
            for candidate in self._index.get(key, ()):
                if candidate in seen:
                    continue
                seen.add(candidate)
                dist = levenshtein_within(query, candidate, cap)
                if dist is None:
                    continue
                rank = (dist, -self._frequency[candidate], candidate)
                if best is None or rank < best:
                    best = rank
        if best is None:
            return None
        dist, neg_freq, low = best
        return Suggestion(word=self._display[low], distance=dist, frequency=-neg_freq)


def spellcheck_token(token_text: str, dictionary: FrequencyDictionary) -> str:
    """Classify one checkable token as correct, wrong, or unknown."""
    suggestion = dictionary.lookup(token_text)
    if suggestion is None:
        return "unknown"
    return "correct" if suggestion.distance == 0 else "wrong"


@dataclass(frozen=True)
class QualityReport:
    key: str
    n_skipped: int
    n_correct: int
    n_wrong: int
    n_unknown: int
    pct_right: float | None
    pct_wrong: float | None
    pct_unknown: float | None
    good_quality: float | None
    unknown_good_quality: float | None

    @property
    def defined(self) -> bool:
        return self.pct_right is not None

    @classmethod
    def from_counts(
        cls, key: str, n_skipped: int, n_correct: int, n_wrong: int, n_unknown: int
    ) -> "QualityReport":
        checked = n_correct + n_wrong + n_unknown
        known = n_correct + n_wrong
        pct_right = round2(100.0 * n_correct / checked) if checked else None
        return cls(
            key=key,
            n_skipped=n_skipped,
            n_correct=n_correct,
            n_wrong=n_wrong,
            n_unknown=n_unknown,
            pct_right=pct_right,
            pct_wrong=round2(100.0 * n_wrong / checked) if checked else None,
            pct_unknown=round2(100.0 * n_unknown / checked) if checked else None,
            good_quality=round2(100.0 * n_correct / known) if known else None,
            unknown_good_quality=pct_right,
        )


def score_tokens(
    key: str, token_texts: Iterable[str], dictionary: FrequencyDictionary
) -> QualityReport:
    counts = {"correct": 0, "wrong": 0, "unknown": 0}
    skipped = 0
    for text in token_texts:
        if not is_checkable(text):
            skipped += 1
            continue
        counts[spellcheck_token(text, dictionary)] += 1
    return QualityReport.from_counts(
        key, skipped, counts["correct"], counts["wrong"], counts["unknown"]
    )


def score_document(doc, dictionary: FrequencyDictionary) -> QualityReport:
    """Spellcheck every token of an annotated document."""
    return score_tokens(
        doc.document_id, (doc.token_text(t) for t in doc.tokens), dictionary
    )


def aggregate_reports(
    reports: list[QualityReport],
    group_of: Callable[[QualityReport], str] | None = None,
) -> list[QualityReport]:
    """Sum counts per group and recompute percentages from the sums.

    Percentages are never averaged. The default grouping keys by the
    report's own key, so a singleton aggregation is the identity.
    """
    if group_of is None:
        group_of = lambda r: r.key
    sums: dict[str, list[int]] = {}
    for report in reports:
        bucket = sums.setdefault(group_of(report), [0, 0, 0, 0])
        bucket[0] += report.n_skipped
        bucket[1] += report.n_correct
        bucket[2] += report.n_wrong
        bucket[3] += report.n_unknown
    return [
        QualityReport.from_counts(key, *sums[key]) for key in sorted(sums)
    ]


REPORT_CSV_HEADER = (
    "key,n_skipped,n_correct,n_wrong,n_unknown,"
    "pct_right,pct_wrong,pct_unknown,good_quality,unknown_good_quality"
)


def write_reports_csv(reports: list[QualityReport], path) -> Path:
    """Report CSV with the fixed header; undefined percentages are empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def fmt(value: float | None) -> str:
        return "" if value is None else f"{value:.2f}"

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_HEADER.split(","))
        for r in reports:
            writer.writerow(
                [
                    r.key, r.n_skipped, r.n_correct, r.n_wrong, r.n_unknown,
                    fmt(r.pct_right), fmt(r.pct_wrong), fmt(r.pct_unknown),
                    fmt(r.good_quality), fmt(r.unknown_good_quality),
                ]
            )
    return path
