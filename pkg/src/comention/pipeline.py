"""One-pass corpus extraction shared by the CLI and the analysis bundle."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from typing import IO, Callable, Iterable

from .extract import CoMention, DEFAULT_MAX_DISTINCT, Mention, extract_post
from .ingest import (
    ALL_TIME,
    BucketLike,
    Granularity,
    Lexicon,
    Post,
    TimeBucket,
    bucket_of,
)
from .network import NodePolicy, WeightedGraph, aggregate


@dataclass
class ExtractionStats:
    posts: int = 0
    posts_with_mentions: int = 0
    mentions: int = 0
    comentions: int = 0
    disqualified: int = 0
    skipped_lines: int = 0


@dataclass
class ExtractionRun:
    """Materialized output of scanning a corpus once."""

    lexicon: Lexicon
    mentions: list[Mention] = field(default_factory=list)
    comentions: list[CoMention] = field(default_factory=list)
    timestamps: dict[str, datetime] = field(default_factory=dict)
    stats: ExtractionStats = field(default_factory=ExtractionStats)


def run_extraction(
    posts: Iterable[Post],
    lexicon: Lexicon,
    max_distinct: int = DEFAULT_MAX_DISTINCT,
    *,
    keep: bool = True,
    mention_sink: Callable[[Mention], None] | None = None,
    comention_sink: Callable[[CoMention], None] | None = None,
) -> ExtractionRun:
    """Scan posts once, collecting streams, timestamps and counters.

    Sinks receive records as they are produced (for NDJSON writers); with
    ``keep=False`` nothing is buffered in memory beyond the timestamp map.
    """
    run = ExtractionRun(lexicon=lexicon)
    for post in posts:
        run.stats.posts += 1
        run.timestamps[post.id] = post.ts
        res = extract_post(post, lexicon, max_distinct)
        if res.mentions:
            run.stats.posts_with_mentions += 1
        run.stats.mentions += len(res.mentions)
        run.stats.comentions += len(res.comentions)
        if res.disqualified:
            run.stats.disqualified += 1
        for m in res.mentions:
            if mention_sink:
                mention_sink(m)
            if keep:
                run.mentions.append(m)
        for c in res.comentions:
            if comention_sink:
                comention_sink(c)
            if keep:
                run.comentions.append(c)
    return run


def buckets_in_run(run: ExtractionRun, granularity: Granularity) -> list[TimeBucket]:
    """Chronological buckets spanning the run's post timestamps."""
    if not run.timestamps:
        return []
    values = list(run.timestamps.values())
    first = bucket_of(min(values), granularity)
    last = bucket_of(max(values), granularity)
    out = []
    cur = first
    while cur <= last:
        out.append(cur)
        cur = cur.next()
    return out


def graphs_by_bucket(
    run: ExtractionRun,
    granularity: Granularity,
    node_policy: NodePolicy = NodePolicy.FULL_LEXICON,
) -> dict[TimeBucket, WeightedGraph]:
    """Unthresholded per-bucket graphs over the run's full time span."""
    by_bucket_co: dict[TimeBucket, list[CoMention]] = defaultdict(list)
    for c in run.comentions:
        by_bucket_co[bucket_of(c.ts, granularity)].append(c)
    by_bucket_me: dict[TimeBucket, list[Mention]] = defaultdict(list)
    for m in run.mentions:
        by_bucket_me[bucket_of(run.timestamps[m.post_id], granularity)].append(m)
    graphs = {}
    for bucket in buckets_in_run(run, granularity):
        graphs[bucket] = aggregate(
            by_bucket_co.get(bucket, []),
            by_bucket_me.get(bucket, []),
            bucket,
            run.lexicon,
            node_policy,
            timestamps=run.timestamps,
        )
    return graphs


def whole_period_graph(
    run: ExtractionRun, node_policy: NodePolicy = NodePolicy.FULL_LEXICON
) -> WeightedGraph:
    return aggregate(run.comentions, run.mentions, ALL_TIME, run.lexicon, node_policy)


def graph_for(
    run: ExtractionRun,
    bucket: BucketLike,
    node_policy: NodePolicy = NodePolicy.FULL_LEXICON,
) -> WeightedGraph:
    """One bucket's graph (or the whole-period graph for ``"all"``)."""
    if bucket == ALL_TIME:
        return whole_period_graph(run, node_policy)
    return aggregate(
        run.comentions,
        run.mentions,
        bucket,
        run.lexicon,
        node_policy,
        timestamps=run.timestamps,
    )


def ndjson_sink(stream: IO[str], to_json: Callable) -> Callable:
    """A sink writing one canonical JSON line per record."""

    def write(record) -> None:
        stream.write(to_json(record))
        stream.write("\n")

    return write
