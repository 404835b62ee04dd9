"""Deterministic graph emitters: GraphML, DOT, CSV, layout JSON and SVG.

All emitters order elements lexicographically and format numbers in a fixed
way, so identical inputs always serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .ingest import ALL_TIME, Lexicon, bucket_label, parse_bucket
from .layout import LayoutError, LayoutResult
from .network import WeightedGraph, edge_csv_text

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def to_graphml(g: WeightedGraph) -> str:
    """GraphML document with ``mention_count`` node and ``weight`` edge attributes."""
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    key_n = ET.SubElement(root, f"{{{GRAPHML_NS}}}key")
    key_n.set("id", "d0")
    key_n.set("for", "node")
    key_n.set("attr.name", "mention_count")
    key_n.set("attr.type", "int")
    key_e = ET.SubElement(root, f"{{{GRAPHML_NS}}}key")
    key_e.set("id", "d1")
    key_e.set("for", "edge")
    key_e.set("attr.name", "weight")
    key_e.set("attr.type", "int")
    graph = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph")
    graph.set("id", bucket_label(g.bucket))
    graph.set("edgedefault", "undirected")
    for ent in g.node_ids():
        node = ET.SubElement(graph, f"{{{GRAPHML_NS}}}node")
        node.set("id", ent)
        data = ET.SubElement(node, f"{{{GRAPHML_NS}}}data")
        data.set("key", "d0")
        data.text = str(g.nodes[ent])
    for (a, b) in sorted(g.edges):
        edge = ET.SubElement(graph, f"{{{GRAPHML_NS}}}edge")
        edge.set("source", a)
        edge.set("target", b)
        data = ET.SubElement(edge, f"{{{GRAPHML_NS}}}data")
        data.set("key", "d1")
        data.text = str(g.edges[(a, b)])
    ET.indent(root)
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def from_graphml(document: str) -> WeightedGraph:
    """Parse a document produced by :func:`to_graphml` back into a graph."""
    root = ET.fromstring(document)
    graph = root.find(f"{{{GRAPHML_NS}}}graph")
    if graph is None:
        raise ValueError("no <graph> element found")
    label = graph.get("id", ALL_TIME)
    bucket = label if label == ALL_TIME else parse_bucket(label)
    nodes: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    for node in graph.findall(f"{{{GRAPHML_NS}}}node"):
        count = 0
        data = node.find(f"{{{GRAPHML_NS}}}data")
        if data is not None and data.text:
            count = int(data.text)
        nodes[node.get("id", "")] = count
    for edge in graph.findall(f"{{{GRAPHML_NS}}}edge"):
        a = edge.get("source", "")
        b = edge.get("target", "")
        weight = 1
        data = edge.find(f"{{{GRAPHML_NS}}}data")
        if data is not None and data.text:
            weight = int(data.text)
        edges[(a, b) if a < b else (b, a)] = weight
    return WeightedGraph(bucket=bucket, nodes=nodes, edges=edges)


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: WeightedGraph) -> str:
    """Undirected DOT document with mention_count / weight attributes."""
    lines = [f"graph {_dot_quote(bucket_label(g.bucket))} {{"]
    for ent in g.node_ids():
        lines.append(f"  {_dot_quote(ent)} [mention_count={g.nodes[ent]}];")
    for (a, b) in sorted(g.edges):
        lines.append(f"  {_dot_quote(a)} -- {_dot_quote(b)} [weight={g.edges[(a, b)]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_csv(g: WeightedGraph) -> str:
    return edge_csv_text(g)


def layout_to_json(layout: LayoutResult) -> str:
    """Layout JSON: seed, iterations and per-node [x, y] positions."""
    obj = {
        "seed": layout.seed,
        "iterations": layout.iterations,
        "positions": {ent: [x, y] for ent, (x, y) in sorted(layout.positions.items())},
    }
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def layout_from_json(document: str) -> LayoutResult:
    obj = json.loads(document)
    return LayoutResult(
        positions={ent: (xy[0], xy[1]) for ent, xy in obj["positions"].items()},
        seed=obj["seed"],
        iterations=obj["iterations"],
    )


@dataclass(frozen=True)
class RenderSpec:
    """Visual conventions for SVG snapshots.

    Node area grows with mention count (radius goes with the square root of
    the count share, so rendered area is proportional); set ``linear_radius``
    for radius-proportional sizing instead. Edge darkness covers
    ``darkness_range`` (0 = invisible, 1 = black) scaled logarithmically with
    weight.
    """

    node_size_scale: float = 1.0
    min_radius: float = 4.0
    max_radius: float = 24.0
    darkness_range: tuple[float, float] = (0.15, 1.0)
    canvas: tuple[int, int] = (800, 600)
    linear_radius: bool = False

    def __post_init__(self) -> None:
        if not self.min_radius < self.max_radius:
            raise ValueError("min_radius must be smaller than max_radius")
        if self.canvas[0] <= 0 or self.canvas[1] <= 0:
            raise ValueError("canvas dimensions must be positive")


def edge_darkness_fraction(weight: int, max_weight: int) -> float:
    """Log-scaled darkness share in [0, 1]: log(1+w) / log(1+w_max)."""
    if max_weight <= 0:
        return 0.0
    return math.log1p(weight) / math.log1p(max_weight)


def node_radius(mention_count: int, max_count: int, spec: RenderSpec) -> float:
    """Node radius in pixels under the given render conventions."""
    if max_count <= 0:
        return spec.min_radius * spec.node_size_scale
    share = mention_count / max_count
    frac = share if spec.linear_radius else math.sqrt(share)
    return (spec.min_radius + (spec.max_radius - spec.min_radius) * frac) * spec.node_size_scale


def _gray_hex(darkness: float) -> str:
    level = round(255 * (1.0 - darkness))
    level = min(255, max(0, level))
    return f"#{level:02x}{level:02x}{level:02x}"


def render_svg(
    g: WeightedGraph,
    layout: LayoutResult,
    spec: RenderSpec = RenderSpec(),
    lexicon: Lexicon | None = None,
) -> str:
    """Render one snapshot to SVG 1.1.

    Nodes sit at the layout positions with mention-proportional size; edges
    are gray lines whose darkness scales logarithmically with weight, the
    heaviest edge being darkest. Labels show display names when a lexicon is
    given, ids otherwise.
    """
    for ent in g.nodes:
        if ent not in layout.positions:
            raise LayoutError(f"layout has no position for node {ent!r}")
    width, height = spec.canvas
    margin = spec.max_radius * spec.node_size_scale + 12.0

    def to_px(xy: tuple[float, float]) -> tuple[float, float]:
        x, y = xy
        return (margin + x * (width - 2 * margin), margin + y * (height - 2 * margin))

    max_w = max(g.edges.values(), default=0)
    max_m = max(g.nodes.values(), default=0)
    d_lo, d_hi = spec.darkness_range

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'  <rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for (a, b) in sorted(g.edges):
        x1, y1 = to_px(layout.positions[a])
        x2, y2 = to_px(layout.positions[b])
        frac = edge_darkness_fraction(g.edges[(a, b)], max_w)
        color = _gray_hex(d_lo + (d_hi - d_lo) * frac)
        lines.append(
            f'  <line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
    for ent in g.node_ids():
        x, y = to_px(layout.positions[ent])
        r = node_radius(g.nodes[ent], max_m, spec)
        title = lexicon.get(ent).display_name if lexicon and ent in lexicon else ent
        lines.append(
            f'  <circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" '
            f'fill="#7da7c9" stroke="#2f4a63" stroke-width="1"/>'
        )
        lines.append(
            f'  <text x="{x:.2f}" y="{y - r - 3:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{escape(title)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
