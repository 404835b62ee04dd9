"""Read-only HTTP API over an analysis bundle.

Five endpoints back the interactive explorer: /entities, /buckets, /graph,
/series and /contexts. Responses are pure functions of (bundle, query);
thresholds are applied server-side on the stored threshold-0 graphs and
layouts are cached per (bucket, threshold, node policy, seed) so positions
stay stable across sessions.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .bundle import AnalysisBundle, context_samples, extraction_run_of
from .export import edge_darkness_fraction
from .ingest import ALL_TIME, Granularity
from .layout import DEFAULT_ITERATIONS, LayoutResult, fr_layout
from .measures import MeasureRecord, measure_graph, measure_series
from .network import NodePolicy, WeightedGraph, apply_threshold, with_node_policy
from .pipeline import whole_period_graph

DEFAULT_LAYOUT_SEED = 42


def _serialize_series(records: list[MeasureRecord]) -> list[dict]:
    return [
        {
            "bucket": str(rec.bucket),
            "density": rec.density,
            "avg_strength": rec.avg_strength,
            "avg_communicability": rec.avg_communicability,
            "per_node": {
                ent: {"strength": nm.strength, "communicability": nm.communicability}
                for ent, nm in sorted(rec.per_node.items())
            },
        }
        for rec in records
    ]


def create_app(
    bundle: AnalysisBundle,
    *,
    layout_seed: int = DEFAULT_LAYOUT_SEED,
    layout_iterations: int = DEFAULT_ITERATIONS,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the explorer API application around one immutable bundle."""
    app = FastAPI(title="comention explorer API")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _malformed_params(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    graphs_by_label = {str(b): g for b, g in bundle.graphs.items()}
    layout_cache: dict[tuple, LayoutResult] = {}
    series_cache: dict[Granularity, list[MeasureRecord]] = {
        bundle.granularity: bundle.series
    }
    all_graph_cache: list[WeightedGraph] = []

    def stored_graph(label: str) -> WeightedGraph:
        if label == ALL_TIME:
            if not all_graph_cache:
                all_graph_cache.append(whole_period_graph(extraction_run_of(bundle)))
            return all_graph_cache[0]
        g = graphs_by_label.get(label)
        if g is None:
            raise HTTPException(status_code=404, detail=f"unknown bucket {label!r}")
        return g

    def parse_policy(value: str) -> NodePolicy:
        try:
            return NodePolicy(value)
        except ValueError:
            raise HTTPException(
                status_code=400,
                detail=f"node_policy must be 'full' or 'mentioned', got {value!r}",
            ) from None

    @app.get("/entities")
    def entities() -> dict:
        return {
            "entities": [
                {"id": ent.id, "name": ent.display_name, "kind": ent.kind.value}
                for ent in bundle.lexicon
            ]
        }

    @app.get("/buckets")
    def buckets() -> dict:
        return {
            "granularity": bundle.granularity.value,
            "buckets": [str(b) for b in bundle.buckets()],
        }

    @app.get("/graph")
    def graph(
        bucket: str,
        threshold: int = Query(default=0, ge=0),
        node_policy: str = "full",
        seed: Optional[int] = None,
    ) -> dict:
        policy = parse_policy(node_policy)
        base = stored_graph(bucket)
        g = with_node_policy(apply_threshold(base, threshold), policy)
        use_seed = layout_seed if seed is None else seed
        cache_key = (bucket, threshold, policy.value, use_seed)
        if cache_key not in layout_cache and g.nodes:
            layout_cache[cache_key] = fr_layout(
                g, iterations=layout_iterations, seed=use_seed
            )
        layout = layout_cache.get(cache_key)
        rec = measure_graph(g, base.bucket) if g.nodes else None
        max_w = max(g.edges.values(), default=0)
        nodes = []
        for ent in g.node_ids():
            nm = rec.per_node[ent] if rec else None
            x, y = layout.positions[ent] if layout else (0.5, 0.5)
            entity = bundle.lexicon.get(ent)
            nodes.append(
                {
                    "id": ent,
                    "name": entity.display_name,
                    "kind": entity.kind.value,
                    "mention_count": g.nodes[ent],
                    "strength": nm.strength if nm else 0.0,
                    "communicability": nm.communicability if nm else 1.0,
                    "x": x,
                    "y": y,
                }
            )
        edges = [
            {
                "a": a,
                "b": b,
                "weight": g.edges[(a, b)],
                "darkness": edge_darkness_fraction(g.edges[(a, b)], max_w),
            }
            for (a, b) in sorted(g.edges)
        ]
        return {
            "bucket": bucket,
            "threshold": threshold,
            "node_policy": policy.value,
            "nodes": nodes,
            "edges": edges,
            "measures": {
                "density": rec.density if rec else 0.0,
                "avg_strength": rec.avg_strength if rec else 0.0,
                "avg_communicability": rec.avg_communicability if rec else 1.0,
            },
            "layout": {"seed": use_seed, "iterations": layout_iterations},
        }

    @app.get("/series")
    def series(granularity: Optional[str] = None) -> dict:
        if granularity is None:
            gran = bundle.granularity
        else:
            try:
                gran = Granularity(granularity)
            except ValueError:
                raise HTTPException(
                    status_code=400, detail=f"unknown granularity {granularity!r}"
                ) from None
        if gran not in series_cache:
            run = extraction_run_of(bundle)
            series_cache[gran] = measure_series(
                run.comentions,
                run.mentions,
                gran,
                lexicon=bundle.lexicon,
                timestamps=run.timestamps,
            )
        return {"granularity": gran.value, "records": _serialize_series(series_cache[gran])}

    @app.get("/contexts")
    def contexts(
        a: str,
        b: str,
        bucket: str,
        limit: int = Query(default=20, ge=0),
    ) -> dict:
        for ent in (a, b):
            if ent not in bundle.lexicon:
                raise HTTPException(status_code=404, detail=f"unknown entity {ent!r}")
        if a == b:
            raise HTTPException(status_code=400, detail="a and b must differ")
        if bucket != ALL_TIME and bucket not in graphs_by_label:
            raise HTTPException(status_code=404, detail=f"unknown bucket {bucket!r}")
        samples = context_samples(bundle, a, b, bucket, limit)
        return {
            "a": min(a, b),
            "b": max(a, b),
            "bucket": bucket,
            "samples": [
                {
                    "post_id": s.post_id,
                    "ts": s.ts,
                    "excerpt": s.excerpt,
                    "spans": [asdict(sp) for sp in s.spans],
                    "source": s.source,
                }
                for s in samples
            ],
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="explorer")

    return app


def serve(
    bundle: AnalysisBundle,
    port: int = 8000,
    host: str = "127.0.0.1",
    *,
    static_dir: str | Path | None = None,
    layout_seed: int = DEFAULT_LAYOUT_SEED,
) -> None:
    """Run the explorer API with uvicorn (blocking)."""
    import uvicorn

    app = create_app(bundle, static_dir=static_dir, layout_seed=layout_seed)
    uvicorn.run(app, host=host, port=port, log_level="warning")
