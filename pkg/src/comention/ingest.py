"""Corpus and lexicon loading, timestamp bucketing, match-pattern helpers.

The corpus is newline-delimited JSON (one post per line, UTF-8) with fields
``id``, ``ts`` (ISO-8601), ``text`` and optional ``source``. The lexicon is a
JSON array of entities, each with ``id``, ``name``, ``patterns`` and optional
``kind`` ("bank" or "supervisor").
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import IO, Iterable, Iterator, Union


class CorpusFormatError(ValueError):
    """A corpus line could not be parsed into a valid post."""


class LexiconError(ValueError):
    """The lexicon document is malformed or internally inconsistent."""


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp and normalize it to UTC.

    Naive timestamps are interpreted as UTC; aware ones are converted.
    """
    if not isinstance(value, str) or not value:
        raise ValueError("timestamp must be a non-empty ISO-8601 string")
    text = value[:-1] + "+00:00" if value.endswith("Z") else value
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"invalid timestamp {value!r}: {exc}") from None
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """Canonical second-precision UTC rendering, e.g. ``2008-10-05T12:00:00Z``."""
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Post:
    """One timestamped text context."""

    id: str
    ts: datetime
    text: str
    source: str | None = None


class EntityKind(str, Enum):
    BANK = "bank"
    SUPERVISOR = "supervisor"


@dataclass(frozen=True)
class Entity:
    """A tracked institution with its match patterns.

    Institutions that merged or were renamed share one entity by listing
    several patterns. Patterns are compiled case-insensitively over Unicode.
    """

    id: str
    display_name: str
    patterns: tuple[str, ...]
    kind: EntityKind = EntityKind.BANK
    regexes: tuple[re.Pattern, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise LexiconError("entity id must be non-empty")
        if not self.patterns:
            raise LexiconError(f"entity {self.id!r} has no patterns")
        compiled = []
        for pat in self.patterns:
            try:
                compiled.append(re.compile(pat, re.IGNORECASE))
            except re.error as exc:
                raise LexiconError(
                    f"entity {self.id!r}: pattern {pat!r} does not compile: {exc}"
                ) from None
        object.__setattr__(self, "regexes", tuple(compiled))


class Lexicon:
    """An ordered collection of entities with unique ids."""

    def __init__(self, entities: Iterable[Entity]):
        self._by_id: dict[str, Entity] = {}
        for ent in entities:
            if ent.id in self._by_id:
                raise LexiconError(f"duplicate entity id {ent.id!r}")
            self._by_id[ent.id] = ent

    def __iter__(self) -> Iterator[Entity]:
        return iter(self._by_id.values())

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self._by_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return list(self) == list(other)

    def get(self, entity_id: str) -> Entity:
        return self._by_id[entity_id]

    def ids(self) -> list[str]:
        """Entity ids in lexicon order."""
        return list(self._by_id)

    def sorted_ids(self) -> list[str]:
        """Entity ids in the deterministic (lexicographic) node order."""
        return sorted(self._by_id)


class Granularity(str, Enum):
    MONTH = "month"
    QUARTER = "quarter"
    YEAR = "year"


# Sentinel bucket for whole-period aggregation.
ALL_TIME = "all"

_SUB_RANGE = {Granularity.MONTH: 12, Granularity.QUARTER: 4, Granularity.YEAR: 1}


@dataclass(frozen=True)
class TimeBucket:
    """A calendar interval at month, quarter or year granularity."""

    granularity: Granularity
    year: int
    sub: int = 1

    def __post_init__(self) -> None:
        limit = _SUB_RANGE[self.granularity]
        if not 1 <= self.sub <= limit:
            raise ValueError(
                f"sub-index {self.sub} out of range [1,{limit}] for {self.granularity.value}"
            )

    def _key(self) -> tuple[int, int]:
        return (self.year, self.sub)

    def _check(self, other: "TimeBucket") -> None:
        if not isinstance(other, TimeBucket):
            raise TypeError(f"cannot compare TimeBucket with {type(other).__name__}")
        if other.granularity is not self.granularity:
            raise ValueError("cannot order buckets of different granularities")

    def __lt__(self, other: "TimeBucket") -> bool:
        self._check(other)
        return self._key() < other._key()

    def __le__(self, other: "TimeBucket") -> bool:
        self._check(other)
        return self._key() <= other._key()

    def __gt__(self, other: "TimeBucket") -> bool:
        self._check(other)
        return self._key() > other._key()

    def __ge__(self, other: "TimeBucket") -> bool:
        self._check(other)
        return self._key() >= other._key()

    def __str__(self) -> str:
        if self.granularity is Granularity.YEAR:
            return f"{self.year:04d}"
        if self.granularity is Granularity.QUARTER:
            return f"{self.year:04d}Q{self.sub}"
        return f"{self.year:04d}-{self.sub:02d}"

    def next(self) -> "TimeBucket":
        """The immediately following bucket at the same granularity."""
        limit = _SUB_RANGE[self.granularity]
        if self.sub < limit:
            return TimeBucket(self.granularity, self.year, self.sub + 1)
        return TimeBucket(self.granularity, self.year + 1, 1)


BucketLike = Union[TimeBucket, str]

_BUCKET_RES = [
    (re.compile(r"^(\d{4})Q([1-4])$"), Granularity.QUARTER),
    (re.compile(r"^(\d{4})-(\d{2})$"), Granularity.MONTH),
    (re.compile(r"^(\d{4})$"), Granularity.YEAR),
]


def parse_bucket(text: str) -> TimeBucket:
    """Parse ``2008``, ``2008Q4`` or ``2008-10`` back into a bucket."""
    for rx, gran in _BUCKET_RES:
        m = rx.match(text)
        if m:
            year = int(m.group(1))
            sub = int(m.group(2)) if gran is not Granularity.YEAR else 1
            return TimeBucket(gran, year, sub)
    raise ValueError(f"unrecognized bucket {text!r}")


def bucket_label(bucket: BucketLike) -> str:
    return bucket if isinstance(bucket, str) else str(bucket)


def bucket_of(ts: datetime, granularity: Granularity) -> TimeBucket:
    """Assign a timestamp to its calendar bucket (in UTC)."""
    utc = ts.astimezone(timezone.utc) if ts.tzinfo else ts.replace(tzinfo=timezone.utc)
    if granularity is Granularity.MONTH:
        return TimeBucket(granularity, utc.year, utc.month)
    if granularity is Granularity.QUARTER:
        return TimeBucket(granularity, utc.year, (utc.month - 1) // 3 + 1)
    return TimeBucket(granularity, utc.year, 1)


def bucket_range(first: TimeBucket, last: TimeBucket) -> Iterator[TimeBucket]:
    """All buckets from ``first`` through ``last`` inclusive, in order."""
    if first.granularity is not last.granularity:
        raise ValueError("bucket range endpoints must share a granularity")
    cur = first
    while cur <= last:
        yield cur
        cur = cur.next()


def suffix_tolerant_pattern(stem: str, max_suffix: int = 4) -> str:
    """Pattern matching ``stem`` plus up to ``max_suffix`` trailing word characters.

    Bounded by word boundaries on both sides; intended for languages where
    nouns take case endings, so that e.g. "nordean" and "nordeassa" match the
    stem "nordea". ``max_suffix`` of 0 matches the bare stem only.
    """
    if not stem:
        raise ValueError("stem must be non-empty")
    if max_suffix < 0:
        raise ValueError("max_suffix must be >= 0")
    return rf"\b{re.escape(stem)}\w{{0,{max_suffix}}}\b"


@dataclass
class SkippedLine:
    """A corpus line rejected under lenient parsing."""

    line_no: int
    reason: str


def _decode_post(obj: object, line_no: int) -> Post:
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"line {line_no}: record is not a JSON object")
    post_id = obj.get("id")
    if not isinstance(post_id, str) or not post_id:
        raise CorpusFormatError(f"line {line_no}: missing or empty 'id'")
    ts_raw = obj.get("ts")
    if not isinstance(ts_raw, str):
        raise CorpusFormatError(f"line {line_no}: missing 'ts'")
    try:
        ts = parse_timestamp(ts_raw)
    except ValueError as exc:
        raise CorpusFormatError(f"line {line_no}: {exc}") from None
    text = obj.get("text")
    if not isinstance(text, str):
        raise CorpusFormatError(f"line {line_no}: missing 'text'")
    source = obj.get("source")
    if source is not None and not isinstance(source, str):
        raise CorpusFormatError(f"line {line_no}: 'source' must be a string")
    return Post(id=post_id, ts=ts, text=text, source=source)


def load_corpus(
    stream: IO[bytes] | IO[str],
    strict: bool = True,
    skipped: list[SkippedLine] | None = None,
) -> Iterator[Post]:
    """Stream posts out of a newline-delimited JSON corpus.

    Yields posts in file order without buffering the corpus. Malformed lines
    (bad JSON, missing fields, invalid timestamps, duplicate ids) raise
    :class:`CorpusFormatError` under strict parsing; under lenient parsing
    they are skipped and appended to ``skipped`` when a list is given.
    Blank lines are ignored.
    """
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            err = CorpusFormatError(f"line {line_no}: invalid JSON: {exc.msg}")
            if strict:
                raise err
            if skipped is not None:
                skipped.append(SkippedLine(line_no, str(err)))
            continue
        try:
            post = _decode_post(obj, line_no)
            if post.id in seen_ids:
                raise CorpusFormatError(f"line {line_no}: duplicate post id {post.id!r}")
        except CorpusFormatError as err:
            if strict:
                raise
            if skipped is not None:
                skipped.append(SkippedLine(line_no, str(err)))
            continue
        seen_ids.add(post.id)
        yield post


def post_to_json(post: Post) -> str:
    """Canonical single-line JSON rendering of a post (stable key order)."""
    obj: dict[str, str] = {"id": post.id, "text": post.text, "ts": format_timestamp(post.ts)}
    if post.source is not None:
        obj["source"] = post.source
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def load_lexicon(stream: IO[bytes] | IO[str]) -> Lexicon:
    """Load and compile an entity lexicon.

    Duplicate ids and non-compiling patterns are fatal.
    """
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise LexiconError(f"lexicon is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, list):
        raise LexiconError("lexicon document must be a JSON array of entities")
    entities = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise LexiconError(f"lexicon entry {i} is not an object")
        ent_id = item.get("id")
        if not isinstance(ent_id, str) or not ent_id:
            raise LexiconError(f"lexicon entry {i}: missing or empty 'id'")
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise LexiconError(f"entity {ent_id!r}: missing 'name'")
        patterns = item.get("patterns")
        if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
            raise LexiconError(f"entity {ent_id!r}: 'patterns' must be a list of strings")
        kind_raw = item.get("kind", EntityKind.BANK.value)
        try:
            kind = EntityKind(kind_raw)
        except ValueError:
            raise LexiconError(f"entity {ent_id!r}: unknown kind {kind_raw!r}") from None
        entities.append(Entity(id=ent_id, display_name=name, patterns=tuple(patterns), kind=kind))
    return Lexicon(entities)


def dump_lexicon(lexicon: Lexicon) -> str:
    """Serialize a lexicon so that loading it back yields an equal lexicon."""
    doc = [
        {
            "id": ent.id,
            "name": ent.display_name,
            "patterns": list(ent.patterns),
            "kind": ent.kind.value,
        }
        for ent in lexicon
    ]
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
