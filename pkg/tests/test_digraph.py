import random

import pytest

from upwardplanar.digraph import (
    block_cut_tree,
    classify,
    expand,
    special_edge_in,
    validate_dag,
)
from upwardplanar.errors import CycleFound, Disconnected, DuplicateEdge, SelfLoop, UnknownVertex


def test_validate_path():
    g = validate_dag([("a", "b"), ("b", "c")])
    assert g.sources() == ["a"] and g.sinks() == ["c"]


def test_validate_two_cycle():
    with pytest.raises(CycleFound) as exc:
        validate_dag([("a", "b"), ("b", "a")])
    assert set(exc.value.cycle) == {"a", "b"}


def test_validate_disconnected():
    with pytest.raises(Disconnected):
        validate_dag([("a", "b"), ("c", "d")])


def test_validate_self_loop_and_duplicate():
    with pytest.raises(SelfLoop):
        validate_dag([("a", "a")])
    with pytest.raises(DuplicateEdge):
        validate_dag([("a", "b"), ("a", "b")])


def test_cycle_witness_is_a_cycle():
    with pytest.raises(CycleFound) as exc:
        validate_dag([("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")])
    cyc = exc.value.cycle
    assert len(cyc) >= 2
    edges = {("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")}
    for x, y in zip(cyc, cyc[1:] + cyc[:1]):
        assert (x, y) in edges


def test_expand_single_edge_noop():
    g = validate_dag([("u", "v")])
    eg = expand(g)
    assert eg.n == 2 and eg.m == 1


def test_expand_path():
    g = validate_dag([("a", "b"), ("b", "c")])
    eg = expand(g)
    assert sorted(eg.vertices) == ["a", "b#1", "b#2", "c"]
    assert set(eg.edges) == {("a", "b#1"), ("b#1", "b#2"), ("b#2", "c")}
    assert eg.special_edge["b#1"] == ("b#1", "b#2")
    assert eg.special_edge["b#2"] == ("b#1", "b#2")


def test_expand_diamond():
    g = validate_dag([("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    eg = expand(g)
    assert eg.n == 6 and eg.m == 6
    assert eg.sources() == ["a"]


def test_expand_idempotent():
    g = validate_dag([("a", "b"), ("b", "c"), ("a", "c")])
    eg = expand(g)
    assert expand(eg) is eg


def test_expand_no_bad_vertices_and_source_counts():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(3, 8)
        perm = list(range(n))
        rng.shuffle(perm)
        edges = set()
        for _ in range(rng.randint(n - 1, 2 * n)):
            i, j = sorted(rng.sample(range(n), 2))
            edges.add((f"v{perm[i]}", f"v{perm[j]}"))
        try:
            g = validate_dag(sorted(edges))
        except Exception:
            continue
        eg = expand(g)
        for v in eg.vertices:
            assert eg.indeg(v) <= 1 or eg.outdeg(v) <= 1
        assert len(eg.sources()) == len(g.sources())
        assert eg.n <= 2 * g.n


def test_classify():
    g = validate_dag([("a", "b"), ("b", "c")])
    assert classify(g, "a") == "source"
    assert classify(g, "c") == "sink"
    eg = expand(g)
    assert classify(eg, "b#1") == "top"
    with pytest.raises(UnknownVertex):
        classify(g, "zzz")


def test_special_edge_in():
    g = validate_dag([("a", "b"), ("b", "c")])
    eg = expand(g)
    assert special_edge_in(eg, "b#1") == ("a", "b#1")  # top: unique incoming
    assert special_edge_in(eg, "a") is None


def test_block_cut_tree_triangle():
    g = validate_dag([("a", "b"), ("b", "c"), ("a", "c")])
    bct = block_cut_tree(g)
    assert len(bct.blocks) == 1 and not bct.cut_vertices


def test_block_cut_tree_path():
    g = validate_dag([("a", "b"), ("b", "c")])
    bct = block_cut_tree(g)
    assert len(bct.blocks) == 2 and bct.cut_vertices == {"b"}


def test_block_cut_tree_bowtie():
    g = validate_dag([("a", "b"), ("a", "v"), ("b", "v"), ("v", "c"), ("v", "d"), ("c", "d")])
    bct = block_cut_tree(g)
    assert len(bct.blocks) == 2 and bct.cut_vertices == {"v"}


def test_block_vertex_count_identity(small_corpus):
    for edges in small_corpus[:120]:
        g = validate_dag(edges)
        bct = block_cut_tree(g)
        assert sum(b.n - 1 for b in bct.blocks) == g.n - 1
