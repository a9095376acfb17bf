"""EPA sentiment vectors, lexicon entries, and lexicon CSV I/O.

Fundamental (lexicon) sentiments live on the bipolar scale [-4.3, 4.3] in
each of the evaluation, potency, and activity dimensions.  Transient
impressions produced by the event equations reuse EpaVector but are not
range-restricted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import InvalidInputError, LexiconError

EPA_MIN = -4.3
EPA_MAX = 4.3

CATEGORIES = ("identity", "behavior", "modifier")

LEXICON_COLUMNS = ("term", "category", "E", "P", "A")


@dataclass(frozen=True)
class EpaVector:
    """A point in evaluation/potency/activity space."""

    e: float
    p: float
    a: float

    def __post_init__(self):
        for value in (self.e, self.p, self.a):
            if not math.isfinite(value):
                raise InvalidInputError(f"non-finite EPA component: {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.p, self.a], dtype=float)

    def in_lexicon_range(self) -> bool:
        return all(EPA_MIN <= v <= EPA_MAX for v in (self.e, self.p, self.a))

    def clamped(self) -> "EpaVector":
        return EpaVector(
            min(max(self.e, EPA_MIN), EPA_MAX),
            min(max(self.p, EPA_MIN), EPA_MAX),
            min(max(self.a, EPA_MIN), EPA_MAX),
        )

    @staticmethod
    def from_array(values) -> "EpaVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (3,):
            raise InvalidInputError(f"expected 3 components, got shape {values.shape}")
        return EpaVector(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class LexiconEntry:
    """One concept with its fundamental sentiment.

    The same term may appear under several categories with distinct EPA
    values; (term, category) is the lexicon key.
    """

    term: str
    category: str
    epa: EpaVector
    note: str = ""

    def __post_init__(self):
        if not self.term or not self.term.strip():
            raise LexiconError("lexicon term must be non-empty")
        if self.category not in CATEGORIES:
            raise LexiconError(
                f"unknown category {self.category!r} for term {self.term!r}; "
                f"expected one of {CATEGORIES}"
            )

    @property
    def key(self) -> tuple[str, str]:
        return (self.term, self.category)


@dataclass
class SentimentLexicon:
    """A keyed collection of lexicon entries with deterministic iteration."""

    name: str = ""
    year: str = ""
    source: str = ""
    _entries: dict[tuple[str, str], LexiconEntry] = field(default_factory=dict)

    def add(self, entry: LexiconEntry, overwrite: bool = False) -> None:
        if not overwrite and entry.key in self._entries:
            raise LexiconError(
                f"duplicate lexicon entry {entry.term!r} ({entry.category})"
            )
        if not entry.epa.in_lexicon_range():
            raise LexiconError(
                f"EPA out of range [{EPA_MIN}, {EPA_MAX}] for "
                f"{entry.term!r} ({entry.category}): {entry.epa}"
            )
        self._entries[entry.key] = entry

    def get(self, term: str, category: str) -> LexiconEntry:
        try:
            return self._entries[(term, category)]
        except KeyError:
            raise LexiconError(f"no entry {term!r} with category {category!r}") from None

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[LexiconEntry]:
        # Lexicographic on (term, category) keeps downstream sampling seeded
        # runs reproducible regardless of insertion order.
        for key in sorted(self._entries):
            yield self._entries[key]

    def entries(self, category: str | None = None) -> list[LexiconEntry]:
        if category is None:
            return list(self)
        return [e for e in self if e.category == category]

    def terms(self, category: str) -> list[str]:
        return [e.term for e in self.entries(category)]

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in CATEGORIES}
        for entry in self._entries.values():
            out[entry.category] += 1
        return out

    def merge(self, other: "SentimentLexicon", overwrite: bool = False) -> None:
        for entry in other:
            self.add(entry, overwrite=overwrite)

    @staticmethod
    def from_entries(entries: Iterable[LexiconEntry], name: str = "") -> "SentimentLexicon":
        lex = SentimentLexicon(name=name)
        for entry in entries:
            lex.add(entry)
        return lex


def read_lexicon_csv(path: str | Path, name: str | None = None) -> SentimentLexicon:
    """Load a lexicon from CSV with header term,category,E,P,A.

    Extra columns are tolerated (and ignored) so expanded-lexicon exports
    round-trip through this importer.
    """
    path = Path(path)
    lexicon = SentimentLexicon(name=name if name is not None else path.stem)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in LEXICON_COLUMNS if c not in header]
        if missing:
            raise LexiconError(f"{path}: missing lexicon columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                epa = EpaVector(float(row["E"]), float(row["P"]), float(row["A"]))
            except (TypeError, ValueError) as exc:
                raise LexiconError(f"{path}:{lineno}: bad EPA value ({exc})") from None
            try:
                entry = LexiconEntry(
                    term=(row["term"] or "").strip(),
                    category=(row["category"] or "").strip(),
                    epa=epa,
                    note=(row.get("note") or "").strip(),
                )
                lexicon.add(entry)
            except LexiconError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from None
    return lexicon


def write_lexicon_csv(lexicon: SentimentLexicon, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEXICON_COLUMNS)
        for entry in lexicon:
            writer.writerow(
                [entry.term, entry.category, repr(entry.epa.e), repr(entry.epa.p), repr(entry.epa.a)]
            )
