"""Command-line front end for the whole pipeline.

    comention extract  --corpus posts.ndjson --lexicon lex.json --out co.ndjson
    comention graph    --corpus ... --lexicon ... --granularity quarter --out edges.csv
    comention measures --corpus ... --lexicon ... --granularity quarter --out measures.csv
    comention layout   --corpus ... --lexicon ... --bucket 2008Q4 --out layout.json
    comention render   --corpus ... --lexicon ... --bucket all --svg snapshot.svg
    comention serve    --corpus ... --lexicon ... --granularity quarter --port 8000

Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import export
from .bundle import build_bundle, load_bundle
from .extract import DEFAULT_MAX_DISTINCT, comention_to_json, mention_to_json
from .ingest import (
    ALL_TIME,
    CorpusFormatError,
    Granularity,
    LexiconError,
    SkippedLine,
    load_corpus,
    load_lexicon,
    parse_bucket,
)
from .layout import DEFAULT_ITERATIONS, fr_layout
from .measures import measure_series
from .network import (
    NodePolicy,
    PipelineMismatchError,
    apply_threshold,
    with_node_policy,
    write_edge_csv,
    write_node_csv,
)
from .pipeline import graph_for, graphs_by_bucket, ndjson_sink, run_extraction

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract here is exit 1.
    def error(self, message):  # noqa: D102
        raise UsageError(message)


def _bucket_arg(value: str):
    if value == ALL_TIME:
        return ALL_TIME
    return parse_bucket(value)


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="fail on the first malformed corpus line (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="skip malformed corpus lines, reporting a count")
    common.add_argument("--quiet", action="store_true", help="suppress statistics output")

    inputs = _Parser(add_help=False)
    inputs.add_argument("--corpus", required=True, help="newline-delimited JSON corpus")
    inputs.add_argument("--lexicon", required=True, help="entity lexicon JSON")
    inputs.add_argument("--max-distinct", type=int, default=DEFAULT_MAX_DISTINCT,
                        help="disqualify posts naming more than this many entities")

    parser = _Parser(prog="comention",
                     description="co-mention network extraction, measures and explorer")
    sub = parser.add_subparsers(dest="command", metavar="<subcommand>")

    p = sub.add_parser("extract", parents=[common, inputs],
                       help="scan the corpus and write the co-mention stream")
    p.add_argument("--out", required=True, help="co-mention NDJSON output path")
    p.add_argument("--mentions-out", help="also write the mention NDJSON stream")

    p = sub.add_parser("graph", parents=[common, inputs],
                       help="aggregate per-bucket weighted graphs to CSV")
    p.add_argument("--granularity", choices=["month", "quarter", "year", "all"],
                   default="quarter")
    p.add_argument("--from", dest="from_bucket", type=parse_bucket, help="first bucket")
    p.add_argument("--to", dest="to_bucket", type=parse_bucket, help="last bucket")
    p.add_argument("--threshold", type=int, default=0, help="minimum edge weight to keep")
    p.add_argument("--node-policy", choices=["full", "mentioned"], default="full")
    p.add_argument("--out", required=True, help="edge CSV output path")
    p.add_argument("--nodes-out", help="node CSV output path")
    p.add_argument("--graphml", help="GraphML output path (single bucket, see --bucket)")
    p.add_argument("--dot", help="DOT output path (single bucket, see --bucket)")
    p.add_argument("--bucket", type=_bucket_arg,
                   help="bucket for --graphml/--dot, e.g. 2008Q4 or 'all'")

    p = sub.add_parser("measures", parents=[common, inputs],
                       help="per-bucket connectivity measures to CSV")
    p.add_argument("--granularity", choices=["month", "quarter", "year"], default="quarter")
    p.add_argument("--from", dest="from_bucket", type=parse_bucket)
    p.add_argument("--to", dest="to_bucket", type=parse_bucket)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--node-policy", choices=["full", "mentioned"], default="full")
    p.add_argument("--out", required=True, help="measures CSV output path")
    p.add_argument("--per-node-out", help="per-node measures CSV output path")

    p = sub.add_parser("layout", parents=[common, inputs],
                       help="force-directed layout for one bucket's graph")
    p.add_argument("--bucket", type=_bucket_arg, default=ALL_TIME)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--node-policy", choices=["full", "mentioned"], default="full")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--out", required=True, help="layout JSON output path")

    p = sub.add_parser("render", parents=[common, inputs],
                       help="render one bucket's snapshot to SVG")
    p.add_argument("--bucket", type=_bucket_arg, default=ALL_TIME)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--node-policy", choices=["full", "mentioned"], default="full")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--svg", required=True, help="SVG output path")

    p = sub.add_parser("serve", parents=[common],
                       help="serve the explorer API over an analysis bundle")
    p.add_argument("--corpus", help="corpus to build a bundle from")
    p.add_argument("--lexicon", help="lexicon (required with --corpus)")
    p.add_argument("--max-distinct", type=int, default=DEFAULT_MAX_DISTINCT)
    p.add_argument("--granularity", choices=["month", "quarter", "year"], default="quarter")
    p.add_argument("--bundle", default="bundle", help="bundle directory to build or load")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=42, help="layout seed for /graph")
    p.add_argument("--ui", help="static explorer assets to serve at /")

    return parser


def _load_inputs(args):
    with open(args.lexicon, "rb") as fh:
        lexicon = load_lexicon(fh)
    skipped: list[SkippedLine] = []
    with open(args.corpus, "rb") as fh:
        posts = list(load_corpus(fh, strict=args.strict, skipped=skipped))
    return lexicon, posts, skipped


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_extract(args) -> int:
    lexicon, posts, skipped = _load_inputs(args)
    with open(args.out, "w", encoding="utf-8", newline="") as co_fh:
        co_sink = ndjson_sink(co_fh, comention_to_json)
        if args.mentions_out:
            with open(args.mentions_out, "w", encoding="utf-8", newline="") as me_fh:
                run = run_extraction(posts, lexicon, args.max_distinct, keep=False,
                                     mention_sink=ndjson_sink(me_fh, mention_to_json),
                                     comention_sink=co_sink)
        else:
            run = run_extraction(posts, lexicon, args.max_distinct, keep=False,
                                 comention_sink=co_sink)
    s = run.stats
    s.skipped_lines = len(skipped)
    _say(args, f"posts={s.posts} mentions={s.mentions} comentions={s.comentions} "
               f"disqualified={s.disqualified} skipped={s.skipped_lines}")
    return EXIT_OK


def _run(args):
    lexicon, posts, skipped = _load_inputs(args)
    run = run_extraction(posts, lexicon, args.max_distinct)
    run.stats.skipped_lines = len(skipped)
    return run


def _clamp_buckets(buckets, args):
    if args.from_bucket:
        buckets = [b for b in buckets if b >= args.from_bucket]
    if args.to_bucket:
        buckets = [b for b in buckets if b <= args.to_bucket]
    return buckets


def _cmd_graph(args) -> int:
    run = _run(args)
    policy = NodePolicy(args.node_policy)
    if args.granularity == ALL_TIME:
        graphs = [apply_threshold(graph_for(run, ALL_TIME, policy), args.threshold)]
    else:
        by_bucket = graphs_by_bucket(run, Granularity(args.granularity), policy)
        buckets = _clamp_buckets(sorted(by_bucket), args)
        graphs = [apply_threshold(by_bucket[b], args.threshold) for b in buckets]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_edge_csv(graphs, fh)
    if args.nodes_out:
        with open(args.nodes_out, "w", encoding="utf-8", newline="") as fh:
            write_node_csv(graphs, fh)
    if args.graphml or args.dot:
        if args.granularity == ALL_TIME:
            snapshot = graphs[0]
        elif args.bucket is not None:
            snapshot = with_node_policy(
                apply_threshold(graph_for(run, args.bucket, policy), args.threshold), policy
            )
        else:
            raise UsageError("--graphml/--dot need --bucket (or --granularity all)")
        if args.graphml:
            Path(args.graphml).write_text(export.to_graphml(snapshot), encoding="utf-8")
        if args.dot:
            Path(args.dot).write_text(export.to_dot(snapshot), encoding="utf-8")
    total_edges = sum(g.edge_count() for g in graphs)
    _say(args, f"graphs={len(graphs)} edges={total_edges} skipped={run.stats.skipped_lines}")
    return EXIT_OK


def _cmd_measures(args) -> int:
    from .bundle import format_real

    run = _run(args)
    span = None
    if args.from_bucket and args.to_bucket:
        span = (args.from_bucket, args.to_bucket)
    records = measure_series(
        run.comentions,
        run.mentions,
        Granularity(args.granularity),
        args.threshold,
        NodePolicy(args.node_policy),
        lexicon=run.lexicon,
        timestamps=run.timestamps,
        span=span,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("bucket,density,avg_strength,avg_communicability\n")
        for rec in records:
            fh.write(f"{rec.bucket},{format_real(rec.density)},"
                     f"{format_real(rec.avg_strength)},"
                     f"{format_real(rec.avg_communicability)}\n")
    if args.per_node_out:
        with open(args.per_node_out, "w", encoding="utf-8", newline="") as fh:
            fh.write("bucket,entity,strength,communicability\n")
            for rec in records:
                for ent in sorted(rec.per_node):
                    nm = rec.per_node[ent]
                    fh.write(f"{rec.bucket},{ent},{format_real(nm.strength)},"
                             f"{format_real(nm.communicability)}\n")
    _say(args, f"buckets={len(records)} skipped={run.stats.skipped_lines}")
    return EXIT_OK


def _snapshot(args):
    run = _run(args)
    policy = NodePolicy(args.node_policy)
    g = apply_threshold(graph_for(run, args.bucket, policy), args.threshold)
    return run, with_node_policy(g, policy)


def _cmd_layout(args) -> int:
    _, g = _snapshot(args)
    result = fr_layout(g, iterations=args.iterations, seed=args.seed)
    Path(args.out).write_text(export.layout_to_json(result), encoding="utf-8")
    _say(args, f"nodes={len(result.positions)} seed={result.seed}")
    return EXIT_OK


def _cmd_render(args) -> int:
    run, g = _snapshot(args)
    result = fr_layout(g, iterations=args.iterations, seed=args.seed)
    svg = export.render_svg(g, result, lexicon=run.lexicon)
    Path(args.svg).write_text(svg, encoding="utf-8")
    _say(args, f"nodes={len(g.nodes)} edges={g.edge_count()} svg={args.svg}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    bundle_dir = Path(args.bundle)
    if args.corpus:
        if not args.lexicon:
            raise UsageError("--corpus needs --lexicon")
        with open(args.lexicon, "rb") as fh:
            lexicon = load_lexicon(fh)
        with open(args.corpus, "rb") as fh:
            bundle = build_bundle(
                fh, lexicon, Granularity(args.granularity), bundle_dir,
                max_distinct=args.max_distinct, strict=args.strict,
            )
        _say(args, f"bundle built at {bundle_dir}")
    elif (bundle_dir / "manifest.json").is_file():
        bundle = load_bundle(bundle_dir)
        _say(args, f"bundle loaded from {bundle_dir}")
    else:
        raise UsageError(f"no bundle at {bundle_dir}; pass --corpus and --lexicon to build one")
    _say(args, f"serving on http://{args.host}:{args.port}")
    serve(bundle, port=args.port, host=args.host, static_dir=args.ui, layout_seed=args.seed)
    return EXIT_OK


_COMMANDS = {
    "extract": _cmd_extract,
    "graph": _cmd_graph,
    "measures": _cmd_measures,
    "layout": _cmd_layout,
    "render": _cmd_render,
    "serve": _cmd_serve,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusFormatError, LexiconError, PipelineMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
