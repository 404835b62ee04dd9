"""Global and per-node connectivity measures over weighted graphs.

Density is the realized fraction of possible edges; strength sums incident
edge weights; communicability centrality (also called subgraph centrality) is
the diagonal of the matrix exponential of the binary adjacency, computed from
a full symmetric eigendecomposition. The eigensolver is an internal cyclic
Jacobi implementation, see :mod:`comention.kernels`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .extract import CoMention, Mention
from .ingest import Granularity, Lexicon, TimeBucket, bucket_of, bucket_range
from .network import NodePolicy, WeightedGraph, aggregate, apply_threshold, binarize

# Convergence: off-diagonal Frobenius norm down to 1e-12 of the input norm,
# within at most 100 sweeps.
JACOBI_TOL_FACTOR = 1e-12
JACOBI_MAX_SWEEPS = 100


class EigenConvergenceError(RuntimeError):
    """The Jacobi iteration hit its sweep cap before reaching tolerance."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Full real spectrum of a symmetric matrix.

    ``eigenvectors[:, j]`` is the orthonormal eigenvector for
    ``eigenvalues[j]``; eigenvalues are sorted ascending.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eig_sym(a: np.ndarray) -> EigenDecomposition:
    """Eigendecompose a symmetric real matrix with cyclic Jacobi rotations.

    The input must be exactly symmetric (adjacency matrices are). Raises
    :class:`EigenConvergenceError` with the residual off-diagonal norm if the
    sweep cap is reached first.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 0:
        return EigenDecomposition(np.empty(0), np.empty((0, 0)))
    tol = JACOBI_TOL_FACTOR * float(np.linalg.norm(a))
    work = a.copy()
    w, v, _, off = kernels.jacobi_sweeps(work, JACOBI_MAX_SWEEPS, tol)
    if off > tol:
        raise EigenConvergenceError(
            f"no convergence after {JACOBI_MAX_SWEEPS} sweeps; "
            f"off-diagonal norm {off:.3e} > tolerance {tol:.3e}"
        )
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def density(g: WeightedGraph) -> float:
    """Fraction of realized edges among all node pairs; 0 below two nodes."""
    n = len(g.nodes)
    if n < 2:
        return 0.0
    return 2.0 * g.edge_count() / (n * (n - 1))


def strength(g: WeightedGraph, v: str) -> int:
    """Sum of edge weights incident to ``v`` (its weighted degree)."""
    if v not in g.nodes:
        raise KeyError(f"unknown node {v!r}")
    total = 0
    for (a, b), w in g.edges.items():
        if a == v or b == v:
            total += w
    return total


def _strengths(g: WeightedGraph) -> dict[str, int]:
    totals = {n: 0 for n in g.nodes}
    for (a, b), w in g.edges.items():
        totals[a] += w
        totals[b] += w
    return totals


def avg_strength(g: WeightedGraph) -> float:
    """Mean node strength; equals 2 * total weight / |V|."""
    if not g.nodes:
        raise ValueError("average strength is undefined on an empty node set")
    return sum(_strengths(g).values()) / len(g.nodes)


def communicability(g: WeightedGraph) -> dict[str, float]:
    """Communicability centrality per node, in deterministic node order.

    Computed on the binary adjacency A as the diagonal of exp(A): node v gets
    sum_j (x_j[v])^2 * e^(lambda_j) over the full spectrum, which weights all
    closed walks through v by inverse factorial of their length. Isolated
    nodes score exactly 1.
    """
    a, order = binarize(g)
    if not order:
        return {}
    dec = eig_sym(a)
    scores = (dec.eigenvectors**2) @ np.exp(dec.eigenvalues)
    return {ent: float(scores[i]) for i, ent in enumerate(order)}


def avg_communicability(g: WeightedGraph) -> float:
    """Mean communicability centrality; equals trace(exp(A)) / |V|."""
    if not g.nodes:
        raise ValueError("average communicability is undefined on an empty node set")
    values = communicability(g)
    return sum(values.values()) / len(values)


@dataclass(frozen=True)
class NodeMeasures:
    strength: float
    communicability: float


@dataclass(frozen=True)
class MeasureRecord:
    """One bucket's global measures plus the per-node values behind them."""

    bucket: TimeBucket
    density: float
    avg_strength: float
    avg_communicability: float
    per_node: dict[str, NodeMeasures]


def measure_graph(g: WeightedGraph, bucket: TimeBucket) -> MeasureRecord:
    """Measure one already-built (and already-thresholded) graph."""
    strengths = _strengths(g)
    comm = communicability(g)
    per_node = {n: NodeMeasures(float(strengths[n]), comm[n]) for n in g.node_ids()}
    n = len(per_node)
    if n == 0:
        raise ValueError(f"bucket {bucket} has an empty node set; averages are undefined")
    return MeasureRecord(
        bucket=bucket,
        density=density(g),
        avg_strength=sum(m.strength for m in per_node.values()) / n,
        avg_communicability=sum(m.communicability for m in per_node.values()) / n,
        per_node=per_node,
    )


def measure_series(
    comentions: Iterable[CoMention],
    mentions: Iterable[Mention],
    granularity: Granularity,
    threshold: int = 0,
    node_policy: NodePolicy = NodePolicy.FULL_LEXICON,
    *,
    lexicon: Lexicon,
    timestamps: Mapping[str, datetime],
    span: tuple[TimeBucket, TimeBucket] | None = None,
) -> list[MeasureRecord]:
    """Per-bucket measure records over the corpus time span, in order.

    The span defaults to the full range of post timestamps, so quiet buckets
    appear as edgeless graphs (density 0, average communicability 1). Pass
    ``span`` to clamp the series explicitly. Note that with
    ``mentioned_only`` node policy an empty bucket has no nodes at all and
    cannot be measured; the default full-lexicon policy keeps the series
    total.
    """
    comentions = list(comentions)
    mentions = list(mentions)
    if span is None:
        if not timestamps:
            return []
        ts_values = list(timestamps.values())
        first = bucket_of(min(ts_values), granularity)
        last = bucket_of(max(ts_values), granularity)
    else:
        first, last = span

    by_bucket_co: dict[TimeBucket, list[CoMention]] = defaultdict(list)
    for c in comentions:
        by_bucket_co[bucket_of(c.ts, granularity)].append(c)
    by_bucket_me: dict[TimeBucket, list[Mention]] = defaultdict(list)
    for m in mentions:
        by_bucket_me[bucket_of(timestamps[m.post_id], granularity)].append(m)

    records = []
    for bucket in bucket_range(first, last):
        g = aggregate(
            by_bucket_co.get(bucket, []),
            by_bucket_me.get(bucket, []),
            bucket,
            lexicon,
            node_policy,
            timestamps=timestamps,
        )
        records.append(measure_graph(apply_threshold(g, threshold), bucket))
    return records


def communicability_series(records: Sequence[MeasureRecord], entity_id: str) -> list[float]:
    """One entity's communicability across a measure series (chart helper)."""
    return [r.per_node[entity_id].communicability for r in records]
