"""Tests for the source-count R-node subprocedure.

The demand regression at the bottom hand-encodes a rigid composition on a
nine-vertex skeleton with fourteen virtual edges whose flow network must
come out with sink demands (1,1,1,1,2,2), t_l = 4, t_r = 2, one heart sink
of demand 1 and a pole sink of demand 1, and a saturating flow.
"""

from upwardplanar import oracle
from upwardplanar.digraph import expand, validate_dag
from upwardplanar.embedding import max_flow
from upwardplanar.framework import RNodeContext, biconnected_feasible
from upwardplanar.rnode_flow import (
    FlipData,
    accepts,
    build_network,
    classify_components,
    precheck,
    r_node_sources,
    turn_range,
)
from upwardplanar.shapes import IN, OUT, ShapeDescription, is_coherent

K4 = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]


def test_turn_range():
    assert turn_range(0) == (-1, 1)
    assert turn_range(1) == (-3, 3)
    assert turn_range(3) == (-7, 7)


def _k4_rnode_ctx():
    g = expand(validate_dag(K4))
    fs, tree = biconnected_feasible(g, ("a", "d"), r_node_sources, -9, 9,
                                    return_tree=True)
    node = [n for n in tree.nodes() if n.kind == "R"][0]
    return g, RNodeContext(node, -9, 9)


def test_classify_components_k4():
    g, ctx = _k4_rnode_ctx()
    assert ctx.sigma_mu == 0
    for emb in ctx.flips:
        flip = FlipData(ctx, emb)
        classes = classify_components(ctx, flip)
        assert sum(1 for c in classes if c.extreme) == 4
        assert not any(c.interesting for c in classes)
        for c in classes:
            if not c.extreme:
                assert c.preferred is not None


def test_k4_matches_oracle_and_size_bound():
    g, ctx = _k4_rnode_ctx()
    fs = r_node_sources(ctx)
    want = oracle.brute_force_feasible_set(ctx.g_mu, *ctx.poles)
    assert set(fs) == want
    assert len(fs) <= 72 * ctx.sigma_mu + 54


def test_sources_backend_on_five_wheel():
    # wheel on 5 vertices: rigid skeleton with an interesting component
    edges = [("h", "a"), ("h", "b"), ("h", "c"), ("h", "d"),
             ("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]
    g = validate_dag(edges)
    from upwardplanar.framework import decide_upward_planar
    dec = decide_upward_planar(g, subprocedure=r_node_sources)
    assert dec.verdict == oracle.brute_force_upward_planar(g)[0]


def test_precheck_rejects_extreme_mismatch():
    g, ctx = _k4_rnode_ctx()
    emb = ctx.flips[0]
    flip = FlipData(ctx, emb)
    classes = classify_components(ctx, flip)
    fixed = [ci for ci, c in enumerate(classes) if c.extreme or c.interesting]
    chosen = {ci: next(iter(ctx.child_sets[ci])) for ci in fixed}
    # a shape whose boundary orientations cannot match the all-out source pole
    bad = ShapeDescription(0, 0, 1, 1, IN, IN, OUT, OUT)
    assert precheck(ctx, flip, classes, chosen, bad) is None


# ---------------------------------------------------------------------------
# Demand regression on the hand-encoded nine-vertex configuration (fig6.py)

from fig6 import _configuration, _face_index


def test_demand_regression():
    ctx, emb, flip, classes, chosen, target = _configuration()
    available = precheck(ctx, flip, classes, chosen, target)
    assert available is not None
    assert available == {"a": False, "d": True, "f": True, "g": True, "v": True}
    net, info = build_network(ctx, flip, classes, chosen, target, available)

    def face(verts):
        return ("f", _face_index(emb, verts))

    assert info[face("uab")] == 1
    assert info[face("ubc")] == 1
    assert info[face("abef")] == 1
    assert info[face("bcde")] == 1
    assert info[face("deg")] == 2
    assert info[face("efgv")] == 2
    assert info["tl"] == 4
    assert info["tr"] == 2
    assert info[("heart", 11)] == 1
    assert info["tv"] == 1
    assert net.total_supply == net.total_demand == 16
    value, _ = max_flow(net)
    assert value == 16
    assert accepts(ctx, flip, classes, chosen, target)


def test_regression_rejects_other_pole_label():
    ctx, emb, flip, classes, chosen, target = _configuration()
    # demanding a large outer angle at the unavailable pole u must fail
    bad = ShapeDescription(1, 0, 1, 0, IN, IN, IN, OUT)
    if is_coherent(bad):
        assert precheck(ctx, flip, classes, chosen, bad) is None


HEART_GADGET = [("B", "U"), ("U", "A"), ("A", "V"), ("B", "V"), ("U", "V"),
                ("A", "m"), ("m", "a"), ("m", "b"), ("B", "a"), ("B", "b"),
                ("a", "x"), ("b", "y"), ("A", "x"), ("A", "y")]


def test_singleton_heart_component():
    """A rigid child whose only realizable shape is the heart.

    The cleft face of the gadget (peaks at non-switch top vertices, valleys
    at non-switch bottoms) can only receive its large angle from the pole,
    which pins the pole label to -1 in every embedding. The enclosing rigid
    node then sees a non-extreme boring child with a heart-only preferred
    set, exercising the pole-unavailability branch of the angle check.
    """
    from upwardplanar.digraph import block_cut_tree
    from upwardplanar.framework import decide_upward_planar, tau_window
    from upwardplanar.rnode_tw import r_node_treewidth
    from upwardplanar.shapes import HEART

    comp = validate_dag([("p", "m"), ("m", "a"), ("m", "b"), ("q", "a"), ("q", "b"),
                         ("a", "x"), ("b", "y"), ("p", "x"), ("p", "y")])
    assert oracle.brute_force_feasible_set(comp, "p", "q") == {HEART}

    g = validate_dag(HEART_GADGET)
    want, _ = oracle.brute_force_upward_planar(g)
    assert decide_upward_planar(g, subprocedure=r_node_sources).verdict == want
    assert decide_upward_planar(g, subprocedure=r_node_treewidth).verdict == want

    eg = expand(g)
    b = block_cut_tree(eg).blocks[0]
    lo, hi = tau_window(b, "sources")
    fs, tree = biconnected_feasible(b, sorted(b.edges)[0], r_node_sources,
                                    lo, hi, return_tree=True)
    rnodes = [n for n in tree.nodes() if n.kind == "R"]
    heart_nodes = [n for n in rnodes if set(n.feasible) == {HEART}]
    assert heart_nodes, "the gadget should collapse to a heart-only rigid node"
    for n in rnodes:
        ctx = RNodeContext(n, lo, hi)
        assert set(r_node_treewidth(ctx)) == set(n.feasible)
        gm = n.pertinent(b)
        if gm.m <= 14:
            o = oracle.brute_force_feasible_set(gm, *n.poles)
            o = {s for s in o if lo <= s.tau_l <= hi and lo <= s.tau_r <= hi}
            assert set(n.feasible) == o
