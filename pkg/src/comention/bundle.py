"""Precomputed analysis bundle backing the explorer service.

A bundle directory holds everything the read-only API needs, so no text is
ever re-scanned at request time:

    manifest.json        granularity, distinct-entity cut, record counts
    lexicon.json         the entity lexicon
    posts.ndjson         the post store (canonical re-serialization)
    mentions.ndjson      every mention with its span (for excerpt highlighting)
    comentions.ndjson    every co-mention pair
    graphs/<bucket>.csv  per-bucket edge lists at threshold 0
    nodes/<bucket>.csv   per-bucket node mention counts
    measures.csv         global measure series at threshold 0
    measures_per_node.csv  per-node strength and communicability series
    index.json           nested pair index: a -> b -> bucket -> [post ids]

Rebuilding from the same inputs writes byte-identical files.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .extract import (
    CoMention,
    DEFAULT_MAX_DISTINCT,
    Mention,
    comention_to_json,
    mention_to_json,
    read_comentions,
    read_mentions,
)
from .ingest import (
    Granularity,
    Lexicon,
    Post,
    SkippedLine,
    TimeBucket,
    bucket_of,
    dump_lexicon,
    format_timestamp,
    load_corpus,
    load_lexicon,
    parse_bucket,
    post_to_json,
)
from .measures import MeasureRecord, NodeMeasures, measure_graph
from .network import WeightedGraph, read_graph_csvs, write_edge_csv, write_node_csv
from .pipeline import ExtractionRun, graphs_by_bucket, run_extraction

BUNDLE_FORMAT = "comention-bundle/1"

# 9 significant digits for reals in CSV output.
def format_real(x: float) -> str:
    return f"{x:.9g}"


@dataclass
class AnalysisBundle:
    """In-memory view of a bundle directory."""

    lexicon: Lexicon
    granularity: Granularity
    max_distinct: int
    posts: dict[str, Post]
    mentions_by_post: dict[str, list[Mention]]
    graphs: dict[TimeBucket, WeightedGraph]
    series: list[MeasureRecord]
    pair_index: dict[tuple[str, str], dict[str, list[str]]]
    comentions: list[CoMention] = field(default_factory=list)

    def buckets(self) -> list[TimeBucket]:
        return sorted(self.graphs)


def _series_from_graphs(
    graphs: dict[TimeBucket, WeightedGraph]
) -> list[MeasureRecord]:
    return [measure_graph(graphs[b], b) for b in sorted(graphs)]


def _build_pair_index(
    comentions: Iterable[CoMention], granularity: Granularity
) -> dict[tuple[str, str], dict[str, list[str]]]:
    staged: dict[tuple[str, str], dict[str, list[tuple]]] = defaultdict(lambda: defaultdict(list))
    for c in comentions:
        label = str(bucket_of(c.ts, granularity))
        staged[c.pair][label].append((c.ts, c.post_id))
    index: dict[tuple[str, str], dict[str, list[str]]] = {}
    for pair, by_bucket in staged.items():
        index[pair] = {
            label: [pid for _, pid in sorted(entries)] for label, entries in by_bucket.items()
        }
    return index


def _write_measure_csvs(series: list[MeasureRecord], out_dir: Path) -> None:
    with open(out_dir / "measures.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("bucket,density,avg_strength,avg_communicability\n")
        for rec in series:
            fh.write(
                f"{rec.bucket},{format_real(rec.density)},"
                f"{format_real(rec.avg_strength)},{format_real(rec.avg_communicability)}\n"
            )
    with open(out_dir / "measures_per_node.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("bucket,entity,strength,communicability\n")
        for rec in series:
            for ent in sorted(rec.per_node):
                nm = rec.per_node[ent]
                fh.write(
                    f"{rec.bucket},{ent},{format_real(nm.strength)},"
                    f"{format_real(nm.communicability)}\n"
                )


def _read_measure_csvs(bundle_dir: Path) -> list[MeasureRecord]:
    per_node: dict[str, dict[str, NodeMeasures]] = defaultdict(dict)
    with open(bundle_dir / "measures_per_node.csv", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            bucket_s, ent, s, c = line.rstrip("\n").split(",")
            per_node[bucket_s][ent] = NodeMeasures(float(s), float(c))
    records = []
    with open(bundle_dir / "measures.csv", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            bucket_s, dens, avg_s, avg_c = line.rstrip("\n").split(",")
            records.append(
                MeasureRecord(
                    bucket=parse_bucket(bucket_s),
                    density=float(dens),
                    avg_strength=float(avg_s),
                    avg_communicability=float(avg_c),
                    per_node=dict(per_node.get(bucket_s, {})),
                )
            )
    records.sort(key=lambda r: (r.bucket.year, r.bucket.sub))
    return records


def build_bundle(
    corpus: IO[bytes] | IO[str],
    lexicon: Lexicon,
    granularity: Granularity,
    out_dir: str | Path,
    *,
    max_distinct: int = DEFAULT_MAX_DISTINCT,
    strict: bool = True,
    skipped: list[SkippedLine] | None = None,
) -> AnalysisBundle:
    """Run the pipeline over a corpus and persist every bundle file.

    The build is deterministic: running it twice over the same inputs yields
    byte-identical directories.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "graphs").mkdir(exist_ok=True)
    (out / "nodes").mkdir(exist_ok=True)

    posts: dict[str, Post] = {}

    def post_iter():
        for post in load_corpus(corpus, strict=strict, skipped=skipped):
            posts[post.id] = post
            yield post

    run = run_extraction(post_iter(), lexicon, max_distinct)
    graphs = graphs_by_bucket(run, granularity)
    series = _series_from_graphs(graphs)
    pair_index = _build_pair_index(run.comentions, granularity)

    (out / "lexicon.json").write_text(dump_lexicon(lexicon), encoding="utf-8")
    with open(out / "posts.ndjson", "w", encoding="utf-8", newline="") as fh:
        for post in posts.values():
            fh.write(post_to_json(post) + "\n")
    with open(out / "mentions.ndjson", "w", encoding="utf-8", newline="") as fh:
        for m in run.mentions:
            fh.write(mention_to_json(m) + "\n")
    with open(out / "comentions.ndjson", "w", encoding="utf-8", newline="") as fh:
        for c in run.comentions:
            fh.write(comention_to_json(c) + "\n")
    for bucket, g in sorted(graphs.items()):
        with open(out / "graphs" / f"{bucket}.csv", "w", encoding="utf-8", newline="") as fh:
            write_edge_csv([g], fh)
        with open(out / "nodes" / f"{bucket}.csv", "w", encoding="utf-8", newline="") as fh:
            write_node_csv([g], fh)
    _write_measure_csvs(series, out)

    index_doc: dict[str, dict[str, dict[str, list[str]]]] = {}
    for (a, b), by_bucket in sorted(pair_index.items()):
        index_doc.setdefault(a, {})[b] = {k: v for k, v in sorted(by_bucket.items())}
    (out / "index.json").write_text(
        json.dumps(index_doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    manifest = {
        "format": BUNDLE_FORMAT,
        "granularity": granularity.value,
        "max_distinct": max_distinct,
        "posts": run.stats.posts,
        "mentions": run.stats.mentions,
        "comentions": run.stats.comentions,
        "disqualified": run.stats.disqualified,
        "buckets": [str(b) for b in sorted(graphs)],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    mentions_by_post: dict[str, list[Mention]] = defaultdict(list)
    for m in run.mentions:
        mentions_by_post[m.post_id].append(m)
    return AnalysisBundle(
        lexicon=lexicon,
        granularity=granularity,
        max_distinct=max_distinct,
        posts=posts,
        mentions_by_post=dict(mentions_by_post),
        graphs=graphs,
        series=series,
        pair_index=pair_index,
        comentions=run.comentions,
    )


def load_bundle(bundle_dir: str | Path) -> AnalysisBundle:
    """Load a bundle directory written by :func:`build_bundle`."""
    root = Path(bundle_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format {manifest.get('format')!r}")
    granularity = Granularity(manifest["granularity"])
    with open(root / "lexicon.json", "rb") as fh:
        lexicon = load_lexicon(fh)
    posts = {}
    with open(root / "posts.ndjson", encoding="utf-8") as fh:
        for post in load_corpus(fh):
            posts[post.id] = post
    mentions_by_post: dict[str, list[Mention]] = defaultdict(list)
    mentions = []
    with open(root / "mentions.ndjson", encoding="utf-8") as fh:
        for m in read_mentions(fh):
            mentions.append(m)
            mentions_by_post[m.post_id].append(m)
    with open(root / "comentions.ndjson", encoding="utf-8") as fh:
        comentions = list(read_comentions(fh))

    graphs: dict[TimeBucket, WeightedGraph] = {}
    for label in manifest["buckets"]:
        bucket = parse_bucket(label)
        with open(root / "graphs" / f"{label}.csv", encoding="utf-8") as edges_fh, open(
            root / "nodes" / f"{label}.csv", encoding="utf-8"
        ) as nodes_fh:
            graphs[bucket] = read_graph_csvs(edges_fh, nodes_fh, bucket)

    series = _read_measure_csvs(root)

    raw_index = json.loads((root / "index.json").read_text(encoding="utf-8"))
    pair_index: dict[tuple[str, str], dict[str, list[str]]] = {}
    for a, by_b in raw_index.items():
        for b, by_bucket in by_b.items():
            pair_index[(a, b)] = {k: list(v) for k, v in by_bucket.items()}

    return AnalysisBundle(
        lexicon=lexicon,
        granularity=granularity,
        max_distinct=manifest["max_distinct"],
        posts=posts,
        mentions_by_post=dict(mentions_by_post),
        graphs=graphs,
        series=series,
        pair_index=pair_index,
        comentions=comentions,
    )


# Context excerpts clip to this many characters on each side of the closest
# mention pair.
EXCERPT_PADDING = 200


@dataclass(frozen=True)
class SpanInExcerpt:
    entity_id: str
    start: int
    end: int


@dataclass(frozen=True)
class ContextSample:
    """One underlying post behind a network edge, ready for display."""

    post_id: str
    ts: str
    excerpt: str
    spans: tuple[SpanInExcerpt, ...]
    source: str | None


def make_context_sample(
    post: Post, mentions: Iterable[Mention], a: str, b: str
) -> ContextSample:
    """Clip a post to an excerpt around the closest (a, b) mention pair.

    Span offsets are relative to the excerpt; at least one span of each
    entity is always included.
    """
    spans_a = [m for m in mentions if m.entity_id == a]
    spans_b = [m for m in mentions if m.entity_id == b]
    if not spans_a or not spans_b:
        raise ValueError(f"post {post.id!r} does not mention both {a!r} and {b!r}")
    best = min(
        ((ma, mb) for ma in spans_a for mb in spans_b),
        key=lambda pair: (
            max(pair[0].start, pair[1].start) - min(pair[0].end, pair[1].end),
            pair[0].start,
            pair[1].start,
        ),
    )
    lo = max(0, min(best[0].start, best[1].start) - EXCERPT_PADDING)
    hi = min(len(post.text), max(best[0].end, best[1].end) + EXCERPT_PADDING)
    excerpt = post.text[lo:hi]
    spans = tuple(
        SpanInExcerpt(m.entity_id, m.start - lo, m.end - lo)
        for m in sorted(mentions, key=lambda m: (m.start, m.end, m.entity_id))
        if m.entity_id in (a, b) and m.start >= lo and m.end <= hi
    )
    return ContextSample(
        post_id=post.id,
        ts=format_timestamp(post.ts),
        excerpt=excerpt,
        spans=spans,
        source=post.source,
    )


def context_samples(
    bundle: AnalysisBundle,
    a: str,
    b: str,
    bucket_label: str,
    limit: int | None = 20,
) -> list[ContextSample]:
    """Underlying posts for a pair and bucket, newest first.

    ``bucket_label`` may be ``"all"`` to pool every bucket; an unknown pair
    yields an empty list.
    """
    if a > b:
        a, b = b, a
    by_bucket = bundle.pair_index.get((a, b), {})
    if bucket_label == "all":
        ids = [pid for label in sorted(by_bucket) for pid in by_bucket[label]]
    else:
        ids = list(by_bucket.get(bucket_label, []))
    ids.sort(key=lambda pid: (bundle.posts[pid].ts, pid), reverse=True)
    if limit is not None:
        ids = ids[:limit]
    return [
        make_context_sample(bundle.posts[pid], bundle.mentions_by_post.get(pid, []), a, b)
        for pid in ids
    ]


def extraction_run_of(bundle: AnalysisBundle) -> ExtractionRun:
    """Recreate the extraction-run view of a loaded bundle (for re-bucketing)."""
    run = ExtractionRun(lexicon=bundle.lexicon)
    run.mentions = [m for ms in bundle.mentions_by_post.values() for m in ms]
    run.comentions = list(bundle.comentions)
    run.timestamps = {pid: post.ts for pid, post in bundle.posts.items()}
    return run
