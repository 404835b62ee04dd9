"""Mention detection and pair-wise co-mention extraction.

A mention is one occurrence of an entity's name inside a post. Every distinct
entity is counted once per post when forming co-mention pairs, and posts that
name more than ``max_distinct`` entities are disqualified outright (listings
and similar noise produce no pairs at all).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from itertools import combinations
from typing import IO, Iterable, Iterator

from .ingest import Lexicon, Post, format_timestamp, parse_timestamp

DEFAULT_MAX_DISTINCT = 6


@dataclass(frozen=True)
class Mention:
    """One pattern match inside one post.

    ``start``/``end`` are character offsets into the post text, so
    ``surface == text[start:end]`` always holds.
    """

    post_id: str
    entity_id: str
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class CoMention:
    """An unordered pair of distinct entities named in one post.

    The pair is stored canonically with ``a < b``; construction normalizes
    the order and rejects self-pairs.
    """

    post_id: str
    a: str
    b: str
    ts: datetime

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError(f"self-pair {self.a!r} in post {self.post_id!r}")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.a, self.b)


def canonical_pair(x: str, y: str) -> tuple[str, str]:
    """The lexicographically ordered form of an entity pair."""
    if x == y:
        raise ValueError(f"self-pair {x!r}")
    return (x, y) if x < y else (y, x)


def _entity_spans(text: str, regexes) -> list[tuple[int, int]]:
    # One entity's candidate spans from all its patterns, resolved to
    # non-overlapping leftmost-longest. Zero-width matches are dropped.
    cands = []
    for rx in regexes:
        for m in rx.finditer(text):
            if m.end() > m.start():
                cands.append((m.start(), m.end()))
    cands.sort(key=lambda se: (se[0], -se[1]))
    out = []
    last_end = -1
    for s, e in cands:
        if s >= last_end:
            out.append((s, e))
            last_end = e
    return out


def scan_post(post: Post, lexicon: Lexicon) -> list[Mention]:
    """Detect every entity occurrence in one post.

    Entities are scanned independently, so matches of different entities may
    overlap; within one entity overlaps resolve to leftmost-longest. The
    result is sorted by span start. Deduplication to once-per-context happens
    downstream.
    """
    mentions = []
    for ent in lexicon:
        for s, e in _entity_spans(post.text, ent.regexes):
            mentions.append(Mention(post.id, ent.id, s, e, post.text[s:e]))
    mentions.sort(key=lambda m: (m.start, m.end, m.entity_id))
    return mentions


def distinct_entities(mentions: Iterable[Mention]) -> set[str]:
    """The deduplicated entity set of one post's mentions."""
    return {m.entity_id for m in mentions}


def extract_comentions(
    post: Post, lexicon: Lexicon, max_distinct: int = DEFAULT_MAX_DISTINCT
) -> list[CoMention]:
    """All unordered entity pairs named in one post, or nothing at all.

    With m distinct entities the output holds m*(m-1)/2 pairs; posts with
    m < 2 produce none, and posts with m > max_distinct are disqualified as
    a whole.
    """
    if max_distinct < 2:
        raise ValueError("max_distinct must be >= 2")
    entities = distinct_entities(scan_post(post, lexicon))
    m = len(entities)
    if m < 2 or m > max_distinct:
        return []
    return [CoMention(post.id, a, b, post.ts) for a, b in combinations(sorted(entities), 2)]


@dataclass(frozen=True)
class PostExtraction:
    """Everything the pipeline needs from one scanned post.

    Mentions are kept even for disqualified posts: per-entity mention volumes
    count all posts, while the disqualification rule applies to relations only.
    """

    post_id: str
    ts: datetime
    mentions: tuple[Mention, ...]
    entities: frozenset[str]
    comentions: tuple[CoMention, ...]
    disqualified: bool


def extract_post(
    post: Post, lexicon: Lexicon, max_distinct: int = DEFAULT_MAX_DISTINCT
) -> PostExtraction:
    """Scan one post and form its co-mention pairs in a single pass."""
    if max_distinct < 2:
        raise ValueError("max_distinct must be >= 2")
    mentions = scan_post(post, lexicon)
    entities = frozenset(distinct_entities(mentions))
    m = len(entities)
    disqualified = m > max_distinct
    if m < 2 or disqualified:
        pairs: tuple[CoMention, ...] = ()
    else:
        pairs = tuple(
            CoMention(post.id, a, b, post.ts) for a, b in combinations(sorted(entities), 2)
        )
    return PostExtraction(post.id, post.ts, tuple(mentions), entities, pairs, disqualified)


def mention_to_json(m: Mention) -> str:
    obj = {"post_id": m.post_id, "entity": m.entity_id, "start": m.start, "end": m.end, "surface": m.surface}
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def comention_to_json(c: CoMention) -> str:
    obj = {"post_id": c.post_id, "a": c.a, "b": c.b, "ts": format_timestamp(c.ts)}
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def read_mentions(stream: IO[bytes] | IO[str]) -> Iterator[Mention]:
    for raw in stream:
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        yield Mention(obj["post_id"], obj["entity"], obj["start"], obj["end"], obj["surface"])


def read_comentions(stream: IO[bytes] | IO[str]) -> Iterator[CoMention]:
    for raw in stream:
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        yield CoMention(obj["post_id"], obj["a"], obj["b"], parse_timestamp(obj["ts"]))
