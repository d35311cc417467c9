"""The acceptance gate: ten standalone criteria, one pass/fail line each.

All expected values are either fixed reference numbers, independent
brute-force results, or exact structural bounds; every tolerance is exact.
Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import os
import sys
import time

from upwardplanar import oracle
from upwardplanar.digraph import block_cut_tree, expand, validate_dag
from upwardplanar.embedding import fixed_embedding_test, check_up_conditions, max_flow
from upwardplanar.framework import (
    RNodeContext,
    biconnected_feasible,
    decide_upward_planar,
    tau_window,
)
from upwardplanar.rnode_flow import accepts as flow_accepts
from upwardplanar.rnode_flow import build_network, precheck, r_node_sources
from upwardplanar.rnode_tw import r_node_treewidth, validate_pair
from upwardplanar.shapes import BORING_CATALOG, HAT, INVERTED_HAT

SEED = int(os.environ.get("UPT_SEED", oracle.CORPUS_SEED))
_STATE = {}


def report(num, name, ok, detail):
    line = f"ACCEPTANCE {num} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print("\n" + line, file=sys.stderr)
    assert ok, line


def corpus():
    if "corpus" not in _STATE:
        insts = oracle.exhaustive_small_corpus() + oracle.random_corpus(500, seed=SEED)
        _STATE["corpus"] = [validate_dag(e) for e in insts]
    return _STATE["corpus"]


def oracle_verdicts():
    if "oracle" not in _STATE:
        _STATE["oracle"] = [oracle.brute_force_upward_planar(g)[0] for g in corpus()]
    return _STATE["oracle"]


def block_trees():
    """Per instance: the per-block SPQR trees (sources backend, canonical root)."""
    if "trees" not in _STATE:
        all_trees = []
        for g in corpus():
            eg = expand(g)
            per_block = []
            for b in block_cut_tree(eg).blocks:
                if b.m < 2:
                    continue
                lo, hi = tau_window(b, "sources")
                e0 = sorted(b.edges)[0]
                fs, tree = biconnected_feasible(
                    b, e0, r_node_sources, lo, hi, return_tree=True)
                per_block.append((b, e0, lo, hi, tree))
            all_trees.append(per_block)
        _STATE["trees"] = all_trees
    return _STATE["trees"]


def test_criterion_1_oracle_equivalence():
    t0 = time.time()
    want = oracle_verdicts()
    bad = 0
    for g, w in zip(corpus(), want):
        if decide_upward_planar(g, subprocedure=r_node_sources).verdict != w:
            bad += 1
        if decide_upward_planar(g, subprocedure=r_node_treewidth).verdict != w:
            bad += 1
    dt = time.time() - t0
    report(1, "oracle-equivalence", bad == 0 and dt < 600,
           f"{len(want)} instances x 2 backends, {bad} mismatches, {dt:.0f}s")


def test_criterion_2_per_node_feasible_sets():
    t0 = time.time()
    nodes = bad = 0
    for per_block in block_trees():
        for (b, e0, lo, hi, tree) in per_block:
            if tree is None:
                continue
            for n in tree.nodes():
                g_mu = n.pertinent(b)
                if g_mu.n > 9:
                    continue
                oe = e0 if n is tree.root else None
                want = oracle.brute_force_feasible_set(g_mu, *n.poles, outer_edge=oe)
                want = {s for s in want
                        if lo <= s.tau_l <= hi and lo <= s.tau_r <= hi}
                if set(n.feasible) != want:
                    bad += 1
                nodes += 1
    dt = time.time() - t0
    report(2, "per-node-feasible-equivalence", bad == 0 and dt < 900,
           f"{nodes} nodes, {bad} mismatches, {dt:.0f}s")


def _r_contexts():
    if "rctx" not in _STATE:
        out = []
        for per_block in block_trees():
            for (b, e0, lo, hi, tree) in per_block:
                if tree is None:
                    continue
                for n in tree.nodes():
                    if n.kind == "R":
                        out.append((RNodeContext(n, lo, hi), n.feasible))
        _STATE["rctx"] = out
    return _STATE["rctx"]


def test_criterion_3_cross_backend_agreement():
    t0 = time.time()
    bad = 0
    witnesses = []
    for ctx, flow_fs in _r_contexts():
        tw_fs = r_node_treewidth(ctx)
        if set(tw_fs) != set(flow_fs):
            bad += 1
        for shape, (fi, alpha, beta) in ctx.node.note.get("tw_witnesses", {}).items():
            witnesses.append((ctx, fi, shape, alpha, beta))
    _STATE["tw_witnesses"] = witnesses
    dt = time.time() - t0
    report(3, "cross-backend-agreement", bad == 0,
           f"{len(_r_contexts())} R-nodes, {bad} mismatches, {dt:.0f}s")


def test_criterion_4_theorem2_equivalence():
    t0 = time.time()
    pairs = bad = 0
    for g in corpus():
        if g.m > 10:
            continue
        for emb in oracle.enumerate_embeddings(g):
            flow = fixed_embedding_test(g, emb) is not None
            enum = next(iter(oracle.enumerate_up_assignments(g, emb)), None) is not None
            if flow != enum:
                bad += 1
            pairs += 1
    dt = time.time() - t0
    report(4, "theorem2-equivalence", bad == 0,
           f"{pairs} (graph, embedding) pairs, {bad} mismatches, {dt:.0f}s")


def test_criterion_5_turn_bounds():
    viol = total = 0
    for per_block in block_trees():
        for (b, e0, lo, hi, tree) in per_block:
            if tree is None:
                continue
            for n in tree.nodes():
                g_mu = n.pertinent(b)
                sigma_mu = sum(1 for s in g_mu.sources() if s not in n.poles)
                bound = 2 * sigma_mu + 1
                for s in n.feasible:
                    total += 1
                    if abs(s.tau_l) > bound or abs(s.tau_r) > bound:
                        viol += 1
    report(5, "turn-bound-invariant", viol == 0,
           f"{total} shapes checked, {viol} violations")


def test_criterion_6_size_bounds():
    viol = checked = 0
    for per_block in block_trees():
        for (b, e0, lo, hi, tree) in per_block:
            if tree is None:
                continue
            for n in tree.nodes():
                g_mu = n.pertinent(b)
                sigma_mu = sum(1 for s in g_mu.sources() if s not in n.poles)
                fs = n.feasible
                checked += 1
                if len(fs) > 72 * sigma_mu + 54:
                    viol += 1
                for c in range(fs.tau_min, fs.tau_max + 1):
                    if len(fs.shapes_with_tau_l(c)) > 18:
                        viol += 1
                    if len(fs.shapes_with_tau_r(c)) > 18:
                        viol += 1
                for cell in fs.cells.values():
                    if len(cell) > 6:
                        viol += 1
    report(6, "size-bounds", viol == 0, f"{checked} feasible sets, {viol} violations")


def test_criterion_7_boring_catalog():
    viol = checked = 0
    for per_block in block_trees():
        for (b, e0, lo, hi, tree) in per_block:
            if tree is None:
                continue
            for n in tree.nodes():
                if n is tree.root:
                    continue
                g_mu = n.pertinent(b)
                if any(s not in n.poles for s in g_mu.sources()):
                    continue
                checked += 1
                if not set(n.feasible) <= BORING_CATALOG:
                    viol += 1
    # the hat pair arises exactly on the u->w / v->w series composition
    from upwardplanar.framework import q_node_feasible, s_node_feasible
    f1 = q_node_feasible(("u", "w"), ("u", "w"), -5, 5)
    f2 = q_node_feasible(("v", "w"), ("w", "v"), -5, 5)
    hats = set(s_node_feasible(f1, f2, -5, 5)) == {HAT, INVERTED_HAT}
    report(7, "boring-catalog", viol == 0 and hats,
           f"{checked} boring components, {viol} outside catalog, hat-pair={hats}")


def test_criterion_8_expansion_invariance():
    bad = 0
    for g, w in zip(corpus(), oracle_verdicts()):
        eg = expand(g)
        if len(eg.sources()) != len(g.sources()):
            bad += 1
        if decide_upward_planar(eg, subprocedure=r_node_sources).verdict != w:
            bad += 1
    report(8, "expansion-invariance", bad == 0,
           f"{len(corpus())} instances, {bad} mismatches")


def test_criterion_9_witness_validity():
    bad = blocks = 0
    for g, w in zip(corpus(), oracle_verdicts()):
        if not w:
            continue
        eg = expand(g)
        for b in block_cut_tree(eg).blocks:
            if b.m < 1 or b.m > oracle.EDGE_GUARD:
                continue
            verdict, witness = oracle.brute_force_upward_planar(b)
            if not verdict or witness is None:
                if b.m == 0:
                    continue
                bad += 1
                continue
            emb, asg = witness
            if not check_up_conditions(b, emb, asg):
                bad += 1
            blocks += 1
    tw_bad = 0
    tw_wits = _STATE.get("tw_witnesses")
    if tw_wits is None:
        test_criterion_3_cross_backend_agreement()
        tw_wits = _STATE["tw_witnesses"]
    for ctx, fi, shape, alpha, beta in tw_wits:
        ok, _ = validate_pair(ctx, fi, shape, alpha, beta)
        if not ok:
            tw_bad += 1
    report(9, "witness-validity", bad == 0 and tw_bad == 0,
           f"{blocks} block witnesses, {bad} invalid; "
           f"{len(tw_wits)} tw pairs, {tw_bad} invalid")


def test_criterion_10_demand_regression():
    sys.path.insert(0, os.path.dirname(__file__))
    from fig6 import _configuration, _face_index
    ctx, emb, flip, classes, chosen, target = _configuration()
    available = precheck(ctx, flip, classes, chosen, target)
    ok = available is not None
    net = info = None
    if ok:
        net, info = build_network(ctx, flip, classes, chosen, target, available)

        def d(verts):
            return info[("f", _face_index(emb, verts))]

        expected_faces = sorted([d("uab"), d("ubc"), d("abef"), d("bcde"),
                                 d("deg"), d("efgv")])
        ok = (expected_faces == [1, 1, 1, 1, 2, 2]
              and info["tl"] == 4 and info["tr"] == 2
              and info[("heart", 11)] == 1 and info["tv"] == 1
              and net.total_supply == net.total_demand == 16
              and max_flow(net)[0] == 16
              and flow_accepts(ctx, flip, classes, chosen, target))
    report(10, "fig6-demand-regression", ok,
           "demands (1,1,1,1,2,2), tl=4, tr=2, heart=1, tv=1, flow saturates"
           if ok else "demand vector mismatch")
