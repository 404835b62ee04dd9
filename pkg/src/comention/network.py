"""Aggregation of co-mentions into per-bucket weighted graphs.

Edge weights count co-mentioning posts inside a time bucket; node weights
count the posts mentioning each entity (deduplicated per post). A weight
threshold filters weak edges before binary analysis, and the directed
conditional-probability view expresses how often a post naming one entity
also names another.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import IO, Iterable, Mapping

import numpy as np

from .extract import CoMention, Mention, canonical_pair
from .ingest import ALL_TIME, BucketLike, Lexicon, TimeBucket, bucket_label, bucket_of


class PipelineMismatchError(RuntimeError):
    """Streams passed to aggregation do not belong to one extraction run."""


class NodePolicy(str, Enum):
    FULL_LEXICON = "full"
    MENTIONED_ONLY = "mentioned"


@dataclass(frozen=True)
class WeightedGraph:
    """A per-bucket co-mention network snapshot.

    ``nodes`` maps entity id to its mention count (posts mentioning it in the
    bucket); ``edges`` maps canonical unordered pairs to positive integer
    co-mention counts. Instances are treated as immutable: thresholding
    returns a new graph.
    """

    bucket: BucketLike
    nodes: dict[str, int]
    edges: dict[tuple[str, str], int]

    def __post_init__(self) -> None:
        for (a, b), w in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a > b:
                raise ValueError(f"edge {(a, b)!r} is not canonically ordered")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {(a, b)!r} has endpoint outside the node set")
            if w < 1:
                raise ValueError(f"edge {(a, b)!r} has non-positive weight {w}")
        for n, c in self.nodes.items():
            if c < 0:
                raise ValueError(f"node {n!r} has negative mention count")

    def node_ids(self) -> list[str]:
        """Node ids in the deterministic (lexicographic) order."""
        return sorted(self.nodes)

    def weight(self, a: str, b: str) -> int:
        """Edge weight, 0 for absent edges."""
        return self.edges.get(canonical_pair(a, b), 0)

    def total_weight(self) -> int:
        return sum(self.edges.values())

    def edge_count(self) -> int:
        return len(self.edges)


def _in_bucket(ts: datetime, bucket: BucketLike) -> bool:
    if bucket == ALL_TIME:
        return True
    assert isinstance(bucket, TimeBucket)
    return bucket_of(ts, bucket.granularity) == bucket


def _mention_bucket_ts(
    m: Mention, timestamps: Mapping[str, datetime] | None, bucket: BucketLike
) -> datetime | None:
    if bucket == ALL_TIME:
        return None
    if timestamps is None or m.post_id not in timestamps:
        raise PipelineMismatchError(
            f"no timestamp for post {m.post_id!r}; bucketed aggregation needs the "
            "post id -> timestamp mapping from the same extraction run"
        )
    return timestamps[m.post_id]


def aggregate(
    comentions: Iterable[CoMention],
    mentions: Iterable[Mention],
    bucket: BucketLike,
    lexicon: Lexicon,
    node_policy: NodePolicy = NodePolicy.FULL_LEXICON,
    *,
    timestamps: Mapping[str, datetime] | None = None,
) -> WeightedGraph:
    """Fold extraction streams into one bucket's weighted graph.

    Mention records carry no timestamp of their own, so bucketed aggregation
    additionally needs ``timestamps`` (post id -> UTC timestamp) from the same
    run; pass ``bucket=ALL_TIME`` to aggregate the whole period without it.
    Unknown entity ids are fatal, signalling mixed-up pipeline inputs.
    """
    weights: Counter[tuple[str, str]] = Counter()
    for c in comentions:
        if c.a not in lexicon or c.b not in lexicon:
            raise PipelineMismatchError(f"co-mention names unknown entity {c.a!r}/{c.b!r}")
        if _in_bucket(c.ts, bucket):
            weights[c.pair] += 1

    mention_posts: dict[str, set[str]] = defaultdict(set)
    for m in mentions:
        if m.entity_id not in lexicon:
            raise PipelineMismatchError(f"mention names unknown entity {m.entity_id!r}")
        ts = _mention_bucket_ts(m, timestamps, bucket)
        if ts is None or _in_bucket(ts, bucket):
            mention_posts[m.entity_id].add(m.post_id)
    counts = {ent: len(posts) for ent, posts in mention_posts.items()}

    if node_policy is NodePolicy.FULL_LEXICON:
        nodes = {ent_id: counts.get(ent_id, 0) for ent_id in lexicon.ids()}
    else:
        mentioned = set(counts)
        for a, b in weights:
            mentioned.update((a, b))
        nodes = {ent_id: counts.get(ent_id, 0) for ent_id in mentioned}
    return WeightedGraph(bucket=bucket, nodes=nodes, edges=dict(weights))


def apply_threshold(g: WeightedGraph, threshold: int) -> WeightedGraph:
    """Drop edges lighter than ``threshold``; nodes survive untouched."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    edges = {pair: w for pair, w in g.edges.items() if w >= threshold}
    return WeightedGraph(bucket=g.bucket, nodes=dict(g.nodes), edges=edges)


def with_node_policy(g: WeightedGraph, node_policy: NodePolicy) -> WeightedGraph:
    """Restrict a full-lexicon graph to mentioned entities, or return it as is."""
    if node_policy is NodePolicy.FULL_LEXICON:
        return g
    keep = {n for n, c in g.nodes.items() if c > 0}
    for a, b in g.edges:
        keep.update((a, b))
    return WeightedGraph(
        bucket=g.bucket,
        nodes={n: c for n, c in g.nodes.items() if n in keep},
        edges=dict(g.edges),
    )


def binarize(g: WeightedGraph) -> tuple[np.ndarray, list[str]]:
    """The unweighted adjacency matrix plus its node index order.

    Rows/columns follow lexicographic entity order; entries are 1.0 where an
    edge exists regardless of weight, with a zero diagonal.
    """
    order = g.node_ids()
    index = {ent: i for i, ent in enumerate(order)}
    a = np.zeros((len(order), len(order)), dtype=np.float64)
    for (u, v) in g.edges:
        i, j = index[u], index[v]
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a, order


@dataclass(frozen=True)
class Arc:
    """One directed conditional-probability arc.

    ``p`` is pair_contexts / source_contexts; both integers are retained so
    the identity p * source_contexts == pair_contexts stays exact.
    """

    p: float
    pair_contexts: int
    source_contexts: int


@dataclass(frozen=True)
class DirectedCondGraph:
    """Directed network of conditional mention probabilities.

    The arc src -> dst holds the probability that a post mentioning ``src``
    also mentions ``dst``, among posts surviving the distinct-entity cut.
    """

    bucket: BucketLike
    nodes: set[str]
    arcs: dict[tuple[str, str], Arc]


def conditional_graph(
    comentions: Iterable[CoMention],
    mentions: Iterable[Mention],
    bucket: BucketLike,
    *,
    timestamps: Mapping[str, datetime] | None = None,
    max_distinct: int = 6,
) -> DirectedCondGraph:
    """Derive the directed conditional-probability graph for one bucket.

    Posts naming more than ``max_distinct`` entities contribute to neither
    numerator nor denominator, keeping both counts in the same event space.
    """
    pair_counts: Counter[tuple[str, str]] = Counter()
    for c in comentions:
        if _in_bucket(c.ts, bucket):
            pair_counts[c.pair] += 1

    post_entities: dict[str, set[str]] = defaultdict(set)
    for m in mentions:
        post_entities[m.post_id].add(m.entity_id)

    ctx_counts: Counter[str] = Counter()
    for post_id, ents in post_entities.items():
        if len(ents) > max_distinct:
            continue
        if bucket != ALL_TIME:
            if timestamps is None or post_id not in timestamps:
                raise PipelineMismatchError(
                    f"no timestamp for post {post_id!r}; bucketed counting needs the "
                    "post id -> timestamp mapping from the same extraction run"
                )
            if not _in_bucket(timestamps[post_id], bucket):
                continue
        for ent in ents:
            ctx_counts[ent] += 1

    arcs: dict[tuple[str, str], Arc] = {}
    nodes: set[str] = set(ctx_counts)
    for (a, b), pair_n in pair_counts.items():
        for src, dst in ((a, b), (b, a)):
            ctx_n = ctx_counts[src]
            if ctx_n == 0:
                raise PipelineMismatchError(
                    f"entity {src!r} co-mentioned but never counted as mentioned; "
                    "mention and co-mention streams disagree"
                )
            arcs[(src, dst)] = Arc(p=pair_n / ctx_n, pair_contexts=pair_n, source_contexts=ctx_n)
        nodes.update((a, b))
    return DirectedCondGraph(bucket=bucket, nodes=nodes, arcs=arcs)


EDGE_CSV_HEADER = ["bucket", "a", "b", "weight"]
NODE_CSV_HEADER = ["bucket", "entity", "mention_count"]


def write_edge_csv(graphs: Iterable[WeightedGraph], out: IO[str]) -> None:
    """Edge lists as ``bucket,a,b,weight`` rows in stable lexicographic order."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EDGE_CSV_HEADER)
    for g in graphs:
        label = bucket_label(g.bucket)
        for (a, b) in sorted(g.edges):
            w.writerow([label, a, b, g.edges[(a, b)]])


def write_node_csv(graphs: Iterable[WeightedGraph], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(NODE_CSV_HEADER)
    for g in graphs:
        label = bucket_label(g.bucket)
        for ent in g.node_ids():
            w.writerow([label, ent, g.nodes[ent]])


def edge_csv_text(g: WeightedGraph) -> str:
    buf = io.StringIO()
    write_edge_csv([g], buf)
    return buf.getvalue()


def node_csv_text(g: WeightedGraph) -> str:
    buf = io.StringIO()
    write_node_csv([g], buf)
    return buf.getvalue()


def read_graph_csvs(
    edge_stream: IO[str], node_stream: IO[str], bucket: BucketLike
) -> WeightedGraph:
    """Rebuild one bucket's graph from its edge and node CSV files."""
    label = bucket_label(bucket)
    nodes: dict[str, int] = {}
    for row in csv.DictReader(node_stream):
        if row["bucket"] == label:
            nodes[row["entity"]] = int(row["mention_count"])
    edges: dict[tuple[str, str], int] = {}
    for row in csv.DictReader(edge_stream):
        if row["bucket"] == label:
            edges[(row["a"], row["b"])] = int(row["weight"])
    return WeightedGraph(bucket=bucket, nodes=nodes, edges=edges)
