import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from comention.extract import CoMention, Mention
from comention.ingest import ALL_TIME, Granularity, TimeBucket, parse_bucket
from comention.network import (
    NodePolicy,
    PipelineMismatchError,
    WeightedGraph,
    aggregate,
    apply_threshold,
    binarize,
    conditional_graph,
    read_graph_csvs,
    with_node_policy,
    write_edge_csv,
    write_node_csv,
)
from comention.pipeline import run_extraction

from conftest import ts
from corpusgen import planted_corpus, planted_lexicon, random_weighted_graph
from oracles import conditional_counts_oracle, corpus_counts_oracle

Q4 = parse_bucket("2008Q4")


def co(pair, when, post_id="p1"):
    return CoMention(post_id, pair[0], pair[1], when)


def me(entity, post_id):
    return Mention(post_id, entity, 0, 1, "x")


class TestAggregate:
    def test_three_comentions_weight_three(self, bank_lexicon):
        stream = [
            co(("nordea", "sampo"), ts(2008, 10, 5), "a"),
            co(("nordea", "sampo"), ts(2008, 11, 5), "b"),
            co(("nordea", "sampo"), ts(2008, 12, 5), "c"),
        ]
        g = aggregate(stream, [], Q4, bank_lexicon,
                      timestamps={p: ts(2008, 10, 5) for p in "abc"})
        assert g.edges[("nordea", "sampo")] == 3

    def test_empty_streams_full_lexicon(self, bank_lexicon):
        g = aggregate([], [], ALL_TIME, bank_lexicon)
        assert len(g.nodes) == len(bank_lexicon)
        assert g.edges == {}
        assert all(c == 0 for c in g.nodes.values())

    def test_comention_outside_bucket_excluded(self, bank_lexicon):
        stream = [co(("nordea", "sampo"), ts(2009, 1, 5))]
        g = aggregate(stream, [], Q4, bank_lexicon, timestamps={"p1": ts(2009, 1, 5)})
        assert g.edges == {}

    def test_node_counts_deduplicate_posts(self, bank_lexicon):
        mentions = [me("nordea", "a"), me("nordea", "a"), me("nordea", "b")]
        g = aggregate([], mentions, ALL_TIME, bank_lexicon)
        assert g.nodes["nordea"] == 2

    def test_mentioned_only_policy(self, bank_lexicon):
        g = aggregate([], [me("nordea", "a")], ALL_TIME, bank_lexicon,
                      NodePolicy.MENTIONED_ONLY)
        assert set(g.nodes) == {"nordea"}

    def test_unknown_entity_fatal(self, bank_lexicon):
        with pytest.raises(PipelineMismatchError):
            aggregate([], [me("ghost", "a")], ALL_TIME, bank_lexicon)
        with pytest.raises(PipelineMismatchError):
            aggregate([co(("ghost", "nordea"), ts(2008))], [], ALL_TIME, bank_lexicon)

    def test_bucketed_mentions_need_timestamps(self, bank_lexicon):
        with pytest.raises(PipelineMismatchError):
            aggregate([], [me("nordea", "a")], Q4, bank_lexicon)

    def test_order_independence(self, bank_lexicon):
        stream = [
            co(("nordea", "sampo"), ts(2008, 10, 1), "a"),
            co(("op", "sampo"), ts(2008, 10, 2), "b"),
            co(("nordea", "sampo"), ts(2008, 10, 3), "c"),
        ]
        shuffled = list(stream)
        random.Random(3).shuffle(shuffled)
        tsmap = {p: ts(2008, 10, 1) for p in "abc"}
        assert aggregate(stream, [], Q4, bank_lexicon, timestamps=tsmap) == \
            aggregate(shuffled, [], Q4, bank_lexicon, timestamps=tsmap)

    def test_total_weight_equals_qualifying_comentions(self):
        posts, lexicon, patterns = planted_corpus(300, seed=11)
        run = run_extraction(posts, lexicon)
        g = aggregate(run.comentions, run.mentions, ALL_TIME, lexicon)
        assert g.total_weight() == len(run.comentions)
        _, _, pair_counts, _ = corpus_counts_oracle(posts, patterns)
        assert g.edges == dict(pair_counts)


class TestThreshold:
    def test_zero_threshold_is_identity(self, bank_lexicon):
        g = aggregate([co(("nordea", "sampo"), ts(2008))], [], ALL_TIME, bank_lexicon)
        assert apply_threshold(g, 0) == g

    def test_filters_below(self):
        g = WeightedGraph("all", {"a": 0, "b": 0, "c": 0, "d": 0},
                          {("a", "b"): 1, ("b", "c"): 2, ("c", "d"): 5})
        out = apply_threshold(g, 2)
        assert set(out.edges.values()) == {2, 5}
        assert set(out.nodes) == {"a", "b", "c", "d"}

    def test_above_max_clears_edges_keeps_nodes(self):
        g = WeightedGraph("all", {"a": 0, "b": 0}, {("a", "b"): 3})
        out = apply_threshold(g, 10)
        assert out.edges == {}
        assert set(out.nodes) == {"a", "b"}

    def test_idempotent_and_monotone(self):
        rng = random.Random(5)
        for _ in range(50):
            g = random_weighted_graph(rng)
            t1 = rng.randrange(0, 6)
            t2 = rng.randrange(t1, 8)
            g1 = apply_threshold(g, t1)
            g2 = apply_threshold(g, t2)
            assert set(g2.edges) <= set(g1.edges)
            assert apply_threshold(g1, t1) == g1


class TestBinarize:
    def test_single_edge(self):
        g = WeightedGraph("all", {"a": 0, "b": 0, "c": 0}, {("a", "b"): 7})
        a, order = binarize(g)
        assert order == ["a", "b", "c"]
        assert a[0][1] == a[1][0] == 1.0
        assert a.sum() == 2.0

    def test_empty_graph(self):
        g = WeightedGraph("all", {"a": 0, "b": 0}, {})
        a, _ = binarize(g)
        assert a.sum() == 0.0

    def test_weight_independent(self):
        g1 = WeightedGraph("all", {"a": 0, "b": 0}, {("a", "b"): 1})
        g2 = WeightedGraph("all", {"a": 0, "b": 0}, {("a", "b"): 999})
        assert (binarize(g1)[0] == binarize(g2)[0]).all()

    def test_symmetric_zero_diagonal(self):
        rng = random.Random(17)
        for _ in range(25):
            a, _ = binarize(random_weighted_graph(rng))
            assert (a == a.T).all()
            assert (a.diagonal() == 0).all()


class TestConditionalGraph:
    def test_probability_from_counts(self):
        posts, lexicon, patterns = planted_corpus(400, seed=23)
        run = run_extraction(posts, lexicon)
        dg = conditional_graph(run.comentions, run.mentions, ALL_TIME)
        ctx_oracle, pair_oracle = conditional_counts_oracle(posts, patterns)
        assert dg.arcs, "fixture should produce arcs"
        for (src, dst), arc in dg.arcs.items():
            pair = (src, dst) if src < dst else (dst, src)
            assert arc.pair_contexts == pair_oracle[pair]
            assert arc.source_contexts == ctx_oracle[src]
            assert arc.p == pair_oracle[pair] / ctx_oracle[src]
            assert 0.0 < arc.p <= 1.0

    def test_always_comentioned_gives_one(self, bank_lexicon):
        comentions = [co(("nordea", "sampo"), ts(2008, 5, 1), f"p{i}") for i in range(3)]
        mentions = [m for i in range(3) for m in
                    (me("nordea", f"p{i}"), me("sampo", f"p{i}"))]
        dg = conditional_graph(comentions, mentions, ALL_TIME)
        assert dg.arcs[("nordea", "sampo")].p == 1.0
        assert dg.arcs[("sampo", "nordea")].p == 1.0

    def test_no_comention_no_arc(self, bank_lexicon):
        dg = conditional_graph([], [me("nordea", "a"), me("sampo", "b")], ALL_TIME)
        assert dg.arcs == {}
        assert dg.nodes == {"nordea", "sampo"}

    def test_partial_example(self):
        # one entity in 10 qualifying posts, pair in 4 of them
        comentions = [co(("alpha", "beta"), ts(2008, 5, 1), f"p{i}") for i in range(4)]
        mentions = [me("alpha", f"p{i}") for i in range(10)]
        mentions += [me("beta", f"p{i}") for i in range(4)]
        dg = conditional_graph(comentions, mentions, ALL_TIME)
        assert dg.arcs[("alpha", "beta")].p == pytest.approx(0.4)
        assert dg.arcs[("beta", "alpha")].p == 1.0

    def test_disqualified_posts_in_neither_numerator_nor_denominator(self):
        posts, lexicon, patterns = planted_corpus(300, seed=31)
        run = run_extraction(posts, lexicon)
        dg = conditional_graph(run.comentions, run.mentions, ALL_TIME)
        ctx_oracle, _ = conditional_counts_oracle(posts, patterns)
        for ent, n in ctx_oracle.items():
            if any(src == ent for src, _ in dg.arcs):
                arc = next(a for (s, _), a in dg.arcs.items() if s == ent)
                assert arc.source_contexts == n

    def test_identity_is_exact_in_integers(self):
        posts, lexicon, _ = planted_corpus(500, seed=41)
        run = run_extraction(posts, lexicon)
        g = aggregate(run.comentions, run.mentions, ALL_TIME, lexicon)
        dg = conditional_graph(run.comentions, run.mentions, ALL_TIME)
        for (src, dst), arc in dg.arcs.items():
            assert arc.pair_contexts == g.weight(src, dst)


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            WeightedGraph("all", {"a": 0}, {("a", "a"): 1})

    def test_rejects_non_canonical_edge(self):
        with pytest.raises(ValueError):
            WeightedGraph("all", {"a": 0, "b": 0}, {("b", "a"): 1})

    def test_rejects_dangling_endpoint(self):
        with pytest.raises(ValueError):
            WeightedGraph("all", {"a": 0}, {("a", "b"): 1})

    def test_rejects_zero_weight(self):
        with pytest.raises(ValueError):
            WeightedGraph("all", {"a": 0, "b": 0}, {("a", "b"): 0})

    def test_with_node_policy_mentioned(self):
        g = WeightedGraph("all", {"a": 2, "b": 0, "c": 1}, {("a", "c"): 1})
        out = with_node_policy(g, NodePolicy.MENTIONED_ONLY)
        assert set(out.nodes) == {"a", "c"}


class TestCsv:
    def test_row_order_and_round_trip(self):
        g = WeightedGraph(Q4, {"b": 2, "a": 5, "c": 0},
                          {("a", "b"): 3, ("a", "c"): 1})
        edges_buf, nodes_buf = io.StringIO(), io.StringIO()
        write_edge_csv([g], edges_buf)
        write_node_csv([g], nodes_buf)
        assert edges_buf.getvalue().splitlines() == [
            "bucket,a,b,weight",
            "2008Q4,a,b,3",
            "2008Q4,a,c,1",
        ]
        edges_buf.seek(0)
        nodes_buf.seek(0)
        again = read_graph_csvs(edges_buf, nodes_buf, Q4)
        assert again == g


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_aggregation_permutation_invariant(seed):
    rng = random.Random(seed)
    lexicon, _ = planted_lexicon(5)
    ids = [e.id for e in lexicon]
    comentions = []
    for i in range(rng.randrange(0, 30)):
        a, b = rng.sample(ids, 2)
        comentions.append(CoMention(f"p{i}", a, b, ts(2008, 1 + i % 12, 1)))
    shuffled = list(comentions)
    rng.shuffle(shuffled)
    assert aggregate(comentions, [], ALL_TIME, lexicon) == \
        aggregate(shuffled, [], ALL_TIME, lexicon)
