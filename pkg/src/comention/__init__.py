"""Co-mention network analytics toolkit.

Turns timestamped text plus an entity lexicon into temporal weighted
co-mention networks, computes connectivity measures (density, strength,
communicability centrality), lays out and renders snapshots, and serves an
interactive explorer that drills from edges back to the underlying posts.
"""

from .extract import CoMention, Mention, distinct_entities, extract_comentions, scan_post
from .ingest import (
    ALL_TIME,
    Entity,
    Granularity,
    Lexicon,
    Post,
    TimeBucket,
    bucket_of,
    load_corpus,
    load_lexicon,
    suffix_tolerant_pattern,
)
from .layout import LayoutResult, fr_layout, layout_energy
from .measures import (
    EigenDecomposition,
    MeasureRecord,
    avg_communicability,
    avg_strength,
    communicability,
    density,
    eig_sym,
    measure_series,
    strength,
)
from .network import (
    DirectedCondGraph,
    NodePolicy,
    WeightedGraph,
    aggregate,
    apply_threshold,
    binarize,
    conditional_graph,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_TIME",
    "CoMention",
    "DirectedCondGraph",
    "EigenDecomposition",
    "Entity",
    "Granularity",
    "LayoutResult",
    "Lexicon",
    "MeasureRecord",
    "Mention",
    "NodePolicy",
    "Post",
    "TimeBucket",
    "WeightedGraph",
    "aggregate",
    "apply_threshold",
    "avg_communicability",
    "avg_strength",
    "binarize",
    "bucket_of",
    "communicability",
    "conditional_graph",
    "density",
    "distinct_entities",
    "eig_sym",
    "extract_comentions",
    "fr_layout",
    "layout_energy",
    "load_corpus",
    "load_lexicon",
    "measure_series",
    "scan_post",
    "strength",
    "suffix_tolerant_pattern",
]
