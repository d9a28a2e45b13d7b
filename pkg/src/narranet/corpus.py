"""Chaptered narrative parsing, tokenization and character appearance detection.

A raw text is cut into chapters by regular-expression headings at up to three
levels (volume, book, chapter).  Each chapter is tokenized, and a character roster
is matched against the chapter text to produce per-character timelines, i.e. the
sorted set of chapter ordinals in which the character appears.
"""
from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import AmbiguousAlias, ConfigError, NoChaptersFound, NonMonotoneHeading

logger = logging.getLogger(__name__)

UNIT_LEVELS = ("chapter", "book", "volume")
MATCH_MODES = ("word", "phrase")

_TOKEN_RE = re.compile(r"[^\W\d_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphabetic character.

    >>> tokenize("Jean Valjean, the convict!")
    ['jean', 'valjean', 'the', 'convict']
    >>> tokenize("l'homme 1832")
    ['l', 'homme']
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if all(t.isalpha() for t in tokens):
        return tokens
    # \w also admits numeric symbols such as superscripts; split on those too
    return [
        piece
        for t in tokens
        for piece in ("".join(c if c.isalpha() else " " for c in t).split() if not t.isalpha() else (t,))
    ]


def fold(text: str, lower: bool = True) -> str:
    """Strip diacritics (and lowercase) so that ``Thénardier`` matches ``thenardier``."""
    decomposed = unicodedata.normalize("NFKD", text.lower() if lower else text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@dataclass(frozen=True, order=True)
class UnitRef:
    ordinal: int
    volume_index: int = 1
    book_index: int = 1
    chapter_index: int = 1

    @property
    def book_key(self) -> tuple[int, int]:
        return (self.volume_index, self.book_index)


@dataclass(frozen=True)
class Chapter:
    ref: UnitRef
    title: str
    raw_text: str
    tokens: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    """An immutable, ordered collection of chapters.

    ``interstitial`` holds the text between trim markers that is not part of any
    chapter: the preamble before the first chapter heading and the volume/book
    heading blocks.
    """

    chapters: tuple[Chapter, ...]
    interstitial: tuple[str, ...] = ()
    level: str = "chapter"

    def __len__(self) -> int:
        return len(self.chapters)

    def __iter__(self):
        return iter(self.chapters)

    def __getitem__(self, ordinal: int) -> Chapter:
        """Return the chapter with 1-based ``ordinal``."""
        if not 1 <= ordinal <= len(self.chapters):
            raise IndexError(f"ordinal {ordinal} outside 1..{len(self.chapters)}")
        return self.chapters[ordinal - 1]

    @property
    def n_chapters(self) -> int:
        return len(self.chapters)

    @property
    def n_books(self) -> int:
        return len(self.books())

    @property
    def n_volumes(self) -> int:
        return len({c.ref.volume_index for c in self.chapters})

    def books(self) -> dict[tuple[int, int], list[int]]:
        """Map each ``(volume, book)`` key to its chapter ordinals, in narrative order."""
        out: dict[tuple[int, int], list[int]] = {}
        for ch in self.chapters:
            out.setdefault(ch.ref.book_key, []).append(ch.ref.ordinal)
        return out

    def regroup(self, level: str) -> "Corpus":
        """Return a corpus whose units are books or volumes instead of chapters."""
        if level not in UNIT_LEVELS:
            raise ConfigError(f"unit level must be one of {UNIT_LEVELS}, got {level!r}")
        if level == "chapter" or level == self.level:
            return self
        if level == "book":
            key = lambda c: c.ref.book_key  # noqa: E731
        else:
            key = lambda c: (c.ref.volume_index,)  # noqa: E731
        groups: dict[tuple, list[Chapter]] = {}
        for ch in self.chapters:
            groups.setdefault(key(ch), []).append(ch)
        units = []
        per_volume: dict[int, int] = {}
        for ordinal, (k, members) in enumerate(groups.items(), start=1):
            vol = members[0].ref.volume_index
            per_volume[vol] = per_volume.get(vol, 0) + 1
            book = members[0].ref.book_index if level == "book" else 1
            ref = UnitRef(ordinal, vol, book, per_volume[vol] if level == "book" else 1)
            units.append(
                Chapter(
                    ref=ref,
                    title=members[0].title,
                    raw_text="\n".join(m.raw_text for m in members),
                    tokens=tuple(t for m in members for t in m.tokens),
                )
            )
        return Corpus(tuple(units), self.interstitial, level)

    def to_manifest(self) -> dict:
        return {
            "level": self.level,
            "n_chapters": self.n_chapters,
            "n_books": self.n_books,
            "n_volumes": self.n_volumes,
            "chapters": [
                {
                    "ordinal": c.ref.ordinal,
                    "volume": c.ref.volume_index,
                    "book": c.ref.book_index,
                    "chapter": c.ref.chapter_index,
                    "title": c.title,
                    "token_count": c.token_count,
                }
                for c in self.chapters
            ],
        }


@dataclass(frozen=True)
class SegmentationConfig:
    """Heading and trim patterns used by :func:`parse_narrative`.

    Patterns are compiled with ``re.MULTILINE``; a heading pattern should match a
    whole heading line.  ``start_occurrence`` picks which match of
    ``start_marker`` opens the body (negative counts from the end, which skips a
    table of contents that repeats the headings).  The start marker line is kept,
    the end marker line is dropped.
    """

    chapter_pattern: str = r"^[ \t]*CHAPTER\s+[IVXLCDM]+\b.*$"
    book_pattern: str | None = None
    volume_pattern: str | None = None
    start_marker: str | None = None
    start_occurrence: int = 1
    end_marker: str | None = None
    flags: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown segmentation keys: {sorted(unknown)}")
        d = dict(d)
        if "flags" in d:
            d["flags"] = tuple(d["flags"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SegmentationConfig":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_dict(data.get("segmentation", data))

    def _compile(self, pattern: str) -> re.Pattern:
        flags = re.MULTILINE
        if "ignorecase" in self.flags:
            flags |= re.IGNORECASE
        try:
            return re.compile(pattern, flags)
        except re.error as exc:
            raise ConfigError(f"bad pattern {pattern!r}: {exc}") from exc


def _trim(raw: str, markers: SegmentationConfig) -> tuple[str, int]:
    start = 0
    if markers.start_marker:
        hits = list(markers._compile(markers.start_marker).finditer(raw))
        if not hits:
            raise NoChaptersFound(f"start marker {markers.start_marker!r} not found")
        occ = markers.start_occurrence
        try:
            start = hits[occ - 1 if occ > 0 else occ].start()
        except IndexError:
            raise ConfigError(
                f"start marker has {len(hits)} matches, occurrence {occ} requested"
            ) from None
    body = raw[start:]
    if markers.end_marker:
        m = markers._compile(markers.end_marker).search(body)
        if m:
            body = body[: m.start()]
    return body, start


def parse_narrative(raw: str, markers: SegmentationConfig | None = None) -> Corpus:
    """Segment ``raw`` into a :class:`Corpus` of chapters.

    Every character between the trim markers lands either in exactly one chapter
    (from its heading line up to the next heading of any level) or in
    ``Corpus.interstitial``.

    Raises
    ------
    NoChaptersFound
        If no chapter heading matches.
    NonMonotoneHeading
        If a book heading precedes every volume heading, or a chapter precedes
        every book heading, when those levels are configured.
    """
    if not raw:
        raise NoChaptersFound("empty input text")
    markers = markers or SegmentationConfig()
    body, _ = _trim(raw, markers)

    events = []
    for level, pattern in (
        ("volume", markers.volume_pattern),
        ("book", markers.book_pattern),
        ("chapter", markers.chapter_pattern),
    ):
        if pattern:
            for m in markers._compile(pattern).finditer(body):
                events.append((m.start(), m.end(), level))
    # a line matching several levels counts as the coarsest one
    events.sort(key=lambda e: (e[0], UNIT_LEVELS[::-1].index(e[2])))
    dedup = []
    for ev in events:
        if dedup and dedup[-1][0] == ev[0]:
            continue
        dedup.append(ev)
    events = dedup
    if not any(level == "chapter" for _, _, level in events):
        raise NoChaptersFound("no chapter heading matched")

    interstitial = []
    if events[0][0] > 0:
        interstitial.append(body[: events[0][0]])
    chapters = []
    vol = 0 if markers.volume_pattern else 1
    book = 0 if markers.book_pattern else 1
    chap = 0
    for i, (start, end, level) in enumerate(events):
        stop = events[i + 1][0] if i + 1 < len(events) else len(body)
        segment = body[start:stop]
        if level == "volume":
            vol += 1
            book = 0 if markers.book_pattern else 1
            chap = 0
            interstitial.append(segment)
        elif level == "book":
            if vol == 0:
                raise NonMonotoneHeading(f"book heading at offset {start} precedes any volume heading")
            book += 1
            chap = 0
            interstitial.append(segment)
        else:
            if vol == 0:
                raise NonMonotoneHeading(f"chapter heading at offset {start} precedes any volume heading")
            if book == 0:
                raise NonMonotoneHeading(f"chapter heading at offset {start} precedes any book heading")
            chap += 1
            ref = UnitRef(len(chapters) + 1, vol, book, chap)
            title = body[start:end].strip()
            chapters.append(Chapter(ref, title, segment, tuple(tokenize(segment))))
    logger.info("parsed %d chapters", len(chapters))
    return Corpus(tuple(chapters), tuple(interstitial))


@dataclass(frozen=True)
class RosterEntry:
    name: str
    aliases: tuple[str, ...]
    match_mode: str = "word"
    case_sensitive: bool = False


@dataclass(frozen=True)
class CharacterRoster:
    """Canonical character names with the alias patterns that detect them.

    ``word`` aliases match literally (case- and accent-insensitive, whitespace
    flexible) between word boundaries.  ``phrase`` aliases are token sequences
    and match across any run of non-letters, e.g. ``"M. Madeleine"`` over a line
    break.  Entries flagged ``case_sensitive`` keep capitalization, for names
    that double as common words ("Favourite").
    """

    entries: tuple[RosterEntry, ...]
    _alias_keys: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        names = [e.name for e in self.entries]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ConfigError(f"duplicate canonical names: {sorted(dupes)}")
        owners: dict[tuple[str, ...], str] = {}
        for e in self.entries:
            if e.match_mode not in MATCH_MODES:
                raise ConfigError(f"{e.name}: match mode must be one of {MATCH_MODES}")
            if not e.aliases:
                raise ConfigError(f"{e.name}: at least one alias required")
            for alias in e.aliases:
                key = tuple(tokenize(fold(alias)))
                if not alias.strip() or not key:
                    raise ConfigError(f"{e.name}: empty alias")
                other = owners.get(key)
                if other is not None and other != e.name:
                    raise AmbiguousAlias(f"alias {alias!r} claimed by both {other!r} and {e.name!r}")
                owners[key] = e.name
        self._alias_keys.update(owners)

    def __len__(self):
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    @classmethod
    def from_records(cls, records) -> "CharacterRoster":
        entries = []
        for r in records:
            if isinstance(r, RosterEntry):
                entries.append(r)
                continue
            try:
                name = r["name"]
            except (KeyError, TypeError):
                raise ConfigError(f"roster entry without a name: {r!r}") from None
            aliases = r.get("aliases") or [name]
            entries.append(RosterEntry(
                str(name), tuple(str(a) for a in aliases), r.get("match", "word"),
                bool(r.get("case_sensitive", False)),
            ))
        return cls(tuple(entries))

    @classmethod
    def from_mapping(cls, mapping: dict[str, list[str]], match_mode="word") -> "CharacterRoster":
        return cls(tuple(RosterEntry(k, tuple(v), match_mode) for k, v in mapping.items()))

    @classmethod
    def load(cls, path) -> "CharacterRoster":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        records = data.get("characters", data) if isinstance(data, dict) else data
        return cls.from_records(records)


@dataclass(frozen=True)
class Timeline:
    character: str
    chapters: tuple[int, ...]

    @property
    def appearance(self) -> int:
        return len(self.chapters)


def _alias_regex(alias: str, mode: str, case_sensitive: bool = False) -> re.Pattern:
    folded = fold(alias, lower=not case_sensitive)
    if mode == "phrase":
        body = r"[^\w]+".join(re.escape(t) for t in _TOKEN_RE.findall(folded))
    else:
        body = r"\s+".join(re.escape(part) for part in folded.split())
    # \b would fail next to a trailing period ("m."), so use explicit letter lookarounds
    return re.compile(rf"(?<![^\W\d_]){body}(?![^\W\d_])")


def detect_appearances(corpus: Corpus, roster: CharacterRoster) -> dict[str, Timeline]:
    """Resolve roster aliases against every chapter, returning timelines by name.

    A character with no matches still gets an empty timeline.  Output order follows
    the roster.
    """
    if len(roster) == 0:
        raise ConfigError("roster is empty")
    compiled = []
    for e in roster.entries:
        pats = []
        for alias in e.aliases:
            needed = frozenset(tokenize(fold(alias)))
            pats.append((needed, _alias_regex(alias, e.match_mode, e.case_sensitive)))
        compiled.append((e.name, e.case_sensitive, pats))

    hits: dict[str, list[int]] = {e.name: [] for e in roster.entries}
    for ch in corpus.chapters:
        folded = fold(ch.raw_text)
        cased = None
        vocab = set(tokenize(folded))
        for name, case_sensitive, pats in compiled:
            if case_sensitive and cased is None:
                cased = fold(ch.raw_text, lower=False)
            text = cased if case_sensitive else folded
            for needed, rx in pats:
                if needed <= vocab and rx.search(text):
                    hits[name].append(ch.ref.ordinal)
                    break
    return {name: Timeline(name, tuple(chs)) for name, chs in hits.items()}


def timelines_to_json(timelines: dict[str, Timeline]) -> dict[str, list[int]]:
    return {name: list(t.chapters) for name, t in timelines.items()}


def timelines_from_json(data: dict[str, list[int]]) -> dict[str, Timeline]:
    return {name: Timeline(name, tuple(sorted(chs))) for name, chs in data.items()}


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8-sig")
