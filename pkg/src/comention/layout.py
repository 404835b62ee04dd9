"""Deterministic force-directed 2-D layout for network snapshots.

Classic spring-model placement: nodes repel with k^2/d, edges attract with
d^2/k where k = sqrt(area/|V|) over a unit-square canvas, and displacement
per iteration is capped by a temperature cooling linearly to zero. A weak
gravity term pulls everything toward the centroid so disconnected components
stay on canvas. Edge weights do not enter the forces; weight is a rendering
concern.

Initial positions come from a splitmix-style 64-bit generator (constants
below), so a fixed seed reproduces the same picture on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .network import WeightedGraph

DEFAULT_ITERATIONS = 500
DEFAULT_GRAVITY = 0.05
# Initial temperature: 0.1 times the canvas side (unit square).
INITIAL_TEMPERATURE = 0.1

_MASK64 = (1 << 64) - 1


class LayoutError(RuntimeError):
    """Layout produced or received unusable coordinates."""


class SplitMix64:
    """Tiny deterministic PRNG (splitmix64 mixing function).

    State advances by the golden-gamma constant 0x9E3779B97F4A7C15; outputs
    are mixed with the 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB multipliers
    and xor-shifts 30/27/31. Doubles take the top 53 bits into [0, 1).
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass(frozen=True)
class LayoutResult:
    """Final node positions in the unit square, plus the run parameters."""

    positions: dict[str, tuple[float, float]]
    seed: int
    iterations: int


def _initial_positions(n: int, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    pos = np.empty((n, 2), dtype=np.float64)
    for i in range(n):
        pos[i, 0] = rng.next_float()
        pos[i, 1] = rng.next_float()
    return pos


def _rescale_unit_square(pos: np.ndarray) -> np.ndarray:
    out = np.empty_like(pos)
    for axis in range(2):
        lo = pos[:, axis].min()
        hi = pos[:, axis].max()
        if hi > lo:
            out[:, axis] = (pos[:, axis] - lo) / (hi - lo)
        else:
            out[:, axis] = 0.5
    return out


def fr_layout(
    g: WeightedGraph,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    gravity: float = DEFAULT_GRAVITY,
) -> LayoutResult:
    """Compute a deterministic force-directed layout of ``g``.

    Same graph, seed and iteration count give a bit-identical result for a
    given kernel backend. Output coordinates are rescaled into [0, 1]^2; a
    single node lands at (0.5, 0.5).
    """
    order = g.node_ids()
    n = len(order)
    if n < 1:
        raise LayoutError("cannot lay out an empty graph")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    index = {ent: i for i, ent in enumerate(order)}
    edges = np.array(
        [[index[a], index[b]] for (a, b) in sorted(g.edges)], dtype=np.int64
    ).reshape(-1, 2)
    pos = _initial_positions(n, seed)
    k = math.sqrt(1.0 / n)
    kernels.fr_run(pos, edges, iterations, INITIAL_TEMPERATURE, gravity, k)
    if not np.all(np.isfinite(pos)):
        raise LayoutError("layout diverged to non-finite coordinates")
    pos = _rescale_unit_square(pos)
    positions = {ent: (float(pos[i, 0]), float(pos[i, 1])) for ent, i in index.items()}
    return LayoutResult(positions=positions, seed=seed, iterations=iterations)


def layout_energy(g: WeightedGraph, positions: dict[str, tuple[float, float]]) -> float:
    """Potential energy of a placement under the layout's force model.

    Repulsion contributes -k^2 * ln(d) per node pair and attraction d^3/(3k)
    per edge (the potentials whose gradients are the k^2/d and d^2/k forces).
    Lower is better; a single node scores 0.
    """
    order = g.node_ids()
    for ent in order:
        if ent not in positions:
            raise LayoutError(f"no position for node {ent!r}")
    n = len(order)
    if n == 0:
        return 0.0
    k = math.sqrt(1.0 / n)
    energy = 0.0
    for i in range(n):
        xi, yi = positions[order[i]]
        for j in range(i + 1, n):
            xj, yj = positions[order[j]]
            d = max(math.hypot(xi - xj, yi - yj), kernels.MIN_DIST)
            energy -= k * k * math.log(d)
    for (a, b) in g.edges:
        xa, ya = positions[a]
        xb, yb = positions[b]
        d = max(math.hypot(xa - xb, ya - yb), kernels.MIN_DIST)
        energy += d**3 / (3.0 * k)
    return energy
