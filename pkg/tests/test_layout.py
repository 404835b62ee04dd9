import math
import statistics

import pytest

from comention.layout import LayoutError, SplitMix64, fr_layout, layout_energy
from comention.network import WeightedGraph


def two_cliques():
    """Two 4-cliques joined by a single bridge edge."""
    left = [f"c{i}" for i in range(4)]
    right = [f"d{i}" for i in range(4)]
    nodes = {n: 0 for n in left + right}
    edges = {}
    for group in (left, right):
        for i in range(4):
            for j in range(i + 1, 4):
                a, b = sorted((group[i], group[j]))
                edges[(a, b)] = 1
    edges[("c0", "d0")] = 1
    return WeightedGraph("all", nodes, edges), left, right


def dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


class TestSplitMix64:
    def test_published_sequence_for_seed_zero(self):
        rng = SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [
            0xE220A8397B1DCDAF,
            0x6E789E6AA1B965F4,
            0x06C45D188009454F,
        ]

    def test_seed_42(self):
        rng = SplitMix64(42)
        assert rng.next_u64() == 0xBDD732262FEB6E95

    def test_floats_in_unit_interval(self):
        rng = SplitMix64(7)
        for _ in range(1000):
            x = rng.next_float()
            assert 0.0 <= x < 1.0


class TestFrLayout:
    def test_single_node_centered(self):
        g = WeightedGraph("all", {"only": 3}, {})
        res = fr_layout(g, iterations=10, seed=1)
        assert res.positions["only"] == (0.5, 0.5)

    def test_deterministic_bit_identical(self):
        g, _, _ = two_cliques()
        a = fr_layout(g, iterations=200, seed=99)
        b = fr_layout(g, iterations=200, seed=99)
        assert a == b

    def test_different_seeds_differ(self):
        g, _, _ = two_cliques()
        a = fr_layout(g, iterations=50, seed=1)
        b = fr_layout(g, iterations=50, seed=2)
        assert a.positions != b.positions

    def test_positions_within_unit_square(self):
        g, _, _ = two_cliques()
        for seed in range(5):
            res = fr_layout(g, iterations=100, seed=seed)
            for x, y in res.positions.values():
                assert 0.0 <= x <= 1.0
                assert 0.0 <= y <= 1.0
                assert math.isfinite(x) and math.isfinite(y)

    def test_two_cliques_separate(self):
        g, left, right = two_cliques()
        successes = 0
        for seed in range(10):
            pos = fr_layout(g, iterations=500, seed=seed).positions
            intra = [
                dist(pos[g1[i]], pos[g1[j]])
                for g1 in (left, right)
                for i in range(4)
                for j in range(i + 1, 4)
            ]
            inter = [dist(pos[a], pos[b]) for a in left for b in right]
            if statistics.mean(intra) < statistics.mean(inter):
                successes += 1
        assert successes >= 9

    def test_every_node_positioned(self):
        g, _, _ = two_cliques()
        res = fr_layout(g, iterations=20, seed=3)
        assert set(res.positions) == set(g.nodes)

    def test_empty_graph_rejected(self):
        with pytest.raises(LayoutError):
            fr_layout(WeightedGraph("all", {}, {}), seed=0)

    def test_bad_iterations_rejected(self):
        g = WeightedGraph("all", {"a": 0}, {})
        with pytest.raises(ValueError):
            fr_layout(g, iterations=0, seed=0)

    def test_result_records_parameters(self):
        g, _, _ = two_cliques()
        res = fr_layout(g, iterations=33, seed=12345)
        assert res.seed == 12345
        assert res.iterations == 33


class TestLayoutEnergy:
    def test_single_node_zero(self):
        g = WeightedGraph("all", {"a": 0}, {})
        assert layout_energy(g, {"a": (0.5, 0.5)}) == 0.0

    def test_two_nodes_closed_form(self):
        # Hand evaluation at separation exactly k = sqrt(1/2): the repulsive
        # potential is -k^2*ln(k) and the attractive one d^3/(3k) = k^2/3.
        k = math.sqrt(1.0 / 2.0)
        positions = {"a": (0.0, 0.0), "b": (k, 0.0)}
        bare = WeightedGraph("all", {"a": 0, "b": 0}, {})
        linked = WeightedGraph("all", {"a": 0, "b": 0}, {("a", "b"): 5})
        rep = -(k**2) * math.log(k)
        att = k**2 / 3.0
        assert layout_energy(bare, positions) == pytest.approx(rep, rel=1e-12)
        assert layout_energy(linked, positions) == pytest.approx(rep + att, rel=1e-12)

    def test_full_run_not_worse_than_first_iteration(self):
        g, _, _ = two_cliques()
        early = fr_layout(g, iterations=1, seed=4)
        late = fr_layout(g, iterations=500, seed=4)
        assert layout_energy(g, late.positions) <= layout_energy(g, early.positions)

    def test_missing_position_rejected(self):
        g = WeightedGraph("all", {"a": 0, "b": 0}, {})
        with pytest.raises(LayoutError):
            layout_energy(g, {"a": (0.0, 0.0)})
