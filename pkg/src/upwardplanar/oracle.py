"""Brute-force ground truth by exhaustive embedding enumeration.

Everything here is deliberately independent of the SPQR/shape framework: the
only shared machinery is face tracing and the generic max-flow solver, whose
fixed-embedding leg is itself validated against pure angle-assignment
enumeration (see enumerate_up_assignments).
"""

import itertools
import random
from collections import Counter

import networkx as nx

from .digraph import validate_dag
from .embedding import (
    IN,
    OUT,
    SWITCH,
    AngleAssignment,
    FlowNetwork,
    PlanarEmbedding,
    angle_kind,
    fixed_embedding_test,
    max_flow,
    orientation_changes,
    split_outer_face,
    trace_faces,
)
from .errors import TooLarge
from .shapes import ShapeDescription

EDGE_GUARD = 14


def _guard(g):
    if g.m > EDGE_GUARD:
        raise TooLarge(f"{g.m} edges > {EDGE_GUARD}")


def enumerate_rotations(g):
    """All rotation systems of g, one representative per cyclic class."""
    verts = list(g.vertices)
    slots = []
    for v in verts:
        inc = [g.edges[i] for i in g.incident(v)]
        if len(inc) <= 2:
            slots.append([tuple(inc)])
        else:
            first = inc[0]
            slots.append([(first,) + p for p in itertools.permutations(inc[1:])])
    for combo in itertools.product(*slots):
        yield {v: list(order) for v, order in zip(verts, combo)}


def enumerate_embeddings(g):
    """All planar embeddings of g: planar rotation systems x outer-face choices."""
    _guard(g)
    for rot in enumerate_rotations(g):
        faces = trace_faces(rot)
        if g.n - g.m + len(faces) != 2:
            continue
        emb = PlanarEmbedding(rot)
        for outer in range(len(emb.faces)):
            e = PlanarEmbedding(rot)
            e.outer = outer
            yield e


def enumerate_up_assignments(g, emb):
    """All angle assignments satisfying UP0-UP3, by direct enumeration.

    Flat angles are forced to 0, switch angles at non-switch vertices to -1;
    the only freedom is which angle of each switch vertex is large.
    """
    switch = [v for v in g.vertices if g.indeg(v) == 0 or g.outdeg(v) == 0]
    for v in g.vertices:
        if v not in switch and orientation_changes(g, emb, v) != 2:
            return
    base = {}
    slots = {v: [] for v in switch}
    face_fixed = [0] * len(emb.faces)  # sum of forced labels per face
    face_nf = [0] * len(emb.faces)
    for fi, walk in enumerate(emb.faces):
        k = len(walk)
        for i in range(k):
            v = walk[i]
            e1 = (walk[(i - 1) % k], v)
            e2 = (v, walk[(i + 1) % k])
            if angle_kind(g, v, e1, e2) == SWITCH:
                face_nf[fi] += 1
                base[(fi, i)] = -1
                face_fixed[fi] -= 1
                if v in slots:
                    slots[v].append((fi, i))
            else:
                base[(fi, i)] = 0
    targets = [2 if fi == emb.outer else -2 for fi in range(len(emb.faces))]
    order = sorted(switch)
    choice_lists = [slots[v] for v in order]
    if any(not c for c in choice_lists):
        return
    for picks in itertools.product(*choice_lists):
        sums = list(face_fixed)
        for slot in picks:
            sums[slot[0]] += 2
        if all(s == t for s, t in zip(sums, targets)):
            values = dict(base)
            for slot in picks:
                values[slot] = 1
            yield AngleAssignment(values)


def brute_force_upward_planar(g):
    """Decide upward planarity by trying every embedding; returns (verdict, witness)."""
    _guard(g)
    if g.m == 0:
        return True, None
    for emb in enumerate_embeddings(g):
        asg = fixed_embedding_test(g, emb)
        if asg is not None:
            return True, (emb, asg)
    return False, None


def shape_of_assignment(g, emb, asg, u, v):
    """Read the shape description off an upward planar embedding's outer face."""
    sp = split_outer_face(emb, u, v)
    tau_l = sum(asg[(emb.outer, i)] for i, _ in sp.left_angles)
    tau_r = sum(asg[(emb.outer, i)] for i, _ in sp.right_angles)
    lam_u = asg[(emb.outer, sp.pole_angle_u)]
    lam_v = asg[(emb.outer, sp.pole_angle_v)]
    return ShapeDescription(tau_l, tau_r, lam_u, lam_v, *_pole_rhos(g, sp))


def _pole_rhos(g, sp):
    eset = g.edge_set()

    def rho(side, pole_is_u):
        x, y = side
        t, h = (x, y) if (x, y) in eset else (y, x)
        pole = (x if pole_is_u else y)
        return IN if h == pole else OUT

    rho_lu = rho(sp.left_sides[0], True)
    rho_ru = rho(sp.right_sides[0], True)
    rho_lv = rho(sp.left_sides[-1], False)
    rho_rv = rho(sp.right_sides[-1], False)
    return rho_lu, rho_ru, rho_lv, rho_rv


def feasible_shapes_of_embedding(g, emb, u, v):
    """All shape descriptions realizable on one fixed uv-external embedding.

    For each candidate (lam_u, lam_v, tau_l) the remaining demands reduce to a
    switch-vertex / face flow problem with the outer face split into a left
    sink, a right sink, and the two pole angles.
    """
    switch = {w for w in g.vertices if g.indeg(w) == 0 or g.outdeg(w) == 0}
    for w in g.vertices:
        if w not in switch and orientation_changes(g, emb, w) != 2:
            return set()
    sp = split_outer_face(emb, u, v)
    walk = emb.faces[emb.outer]
    k = len(walk)

    def slot_kind(i):
        w = walk[i]
        e1 = (walk[(i - 1) % k], w)
        e2 = (w, walk[(i + 1) % k])
        return angle_kind(g, w, e1, e2)

    left_sw = [(i, w) for i, w in sp.left_angles if slot_kind(i) == SWITCH]
    right_sw = [(i, w) for i, w in sp.right_angles if slot_kind(i) == SWITCH]
    n_l, n_r = len(left_sw), len(right_sw)

    internal = []
    for fi in range(len(emb.faces)):
        if fi == emb.outer:
            continue
        wk = emb.faces[fi]
        slots = []
        for i in range(len(wk)):
            w = wk[i]
            e1 = (wk[(i - 1) % len(wk)], w)
            e2 = (w, wk[(i + 1) % len(wk)])
            if angle_kind(g, w, e1, e2) == SWITCH:
                slots.append(w)
        if len(slots) % 2 or len(slots) // 2 - 1 < 0:
            return set()
        internal.append((fi, slots, len(slots) // 2 - 1))

    rhos = _pole_rhos(g, sp)
    lam_u_opts = _pole_label_options(u in switch, slot_kind(sp.pole_angle_u))
    lam_v_opts = _pole_label_options(v in switch, slot_kind(sp.pole_angle_v))
    found = set()
    for lam_u in lam_u_opts:
        for lam_v in lam_v_opts:
            for tau_l in range(-n_l, n_l + 1, 2):
                tau_r = 2 - lam_u - lam_v - tau_l
                if abs(tau_r) > n_r or (tau_r + n_r) % 2:
                    continue
                if _flow_feasible(g, emb, switch, internal, left_sw, right_sw,
                                  u, v, lam_u, lam_v, tau_l, tau_r, n_l, n_r):
                    found.add(ShapeDescription(tau_l, tau_r, lam_u, lam_v, *rhos))
    return found


def _pole_label_options(is_switch, outer_kind):
    if outer_kind == SWITCH:
        return (-1, 1) if is_switch else (-1,)
    return (0,) if not is_switch else ()


def _flow_feasible(g, emb, switch, internal, left_sw, right_sw,
                   u, v, lam_u, lam_v, tau_l, tau_r, n_l, n_r):
    net = FlowNetwork()
    demand_l = (tau_l + n_l) // 2
    demand_r = (tau_r + n_r) // 2
    if demand_l < 0 or demand_l > n_l or demand_r < 0 or demand_r > n_r:
        return False
    for w in sorted(switch):
        net.add_source(("v", w), 1)
    for fi, slots, d in internal:
        net.add_sink(("f", fi), d)
    net.add_sink("tl", demand_l)
    net.add_sink("tr", demand_r)
    if lam_u == 1:
        net.add_sink("tu", 1)
    if lam_v == 1:
        net.add_sink("tv", 1)
    if net.total_supply != net.total_demand:
        return False
    arcs = set()
    for fi, slots, d in internal:
        for w in slots:
            if w in switch and not (w == u and lam_u == 1) and not (w == v and lam_v == 1):
                arcs.add((("v", w), ("f", fi)))
    for _, w in left_sw:
        if w in switch:
            arcs.add((("v", w), "tl"))
    for _, w in right_sw:
        if w in switch:
            arcs.add((("v", w), "tr"))
    if lam_u == 1:
        arcs.add((("v", u), "tu"))
    if lam_v == 1:
        arcs.add((("v", v), "tv"))
    for a, b in sorted(arcs, key=str):
        net.add_arc(a, b, 1)
    value, _ = max_flow(net)
    return value == net.total_demand


def brute_force_feasible_set(g, u, v, slow=False, outer_edge=None):
    """Shape descriptions of all uv-external upward planar embeddings of g.

    With outer_edge set, only embeddings whose outer face boundary contains
    that edge count (the semantics of a root node's feasible set).
    """
    _guard(g)
    shapes = set()
    seen_rot = set()
    for emb in enumerate_embeddings(g):
        walk = emb.faces[emb.outer]
        if walk.count(u) != 1 or walk.count(v) != 1:
            continue
        if outer_edge is not None:
            k = len(walk)
            sides = {(walk[i], walk[(i + 1) % k]) for i in range(k)}
            if outer_edge not in sides and (outer_edge[1], outer_edge[0]) not in sides:
                continue
        key = (tuple(sorted((w, tuple(es)) for w, es in emb.rotation.items())), emb.outer)
        if key in seen_rot:
            continue
        seen_rot.add(key)
        if slow:
            for asg in enumerate_up_assignments(g, emb):
                shapes.add(shape_of_assignment(g, emb, asg, u, v))
        else:
            shapes |= feasible_shapes_of_embedding(g, emb, u, v)
    return shapes


# ---------------------------------------------------------------------------
# Corpus generation

CORPUS_SEED = 0xC0FFEE


def _canonical_graph(n, edges):
    """Lexicographically smallest relabeling of an undirected edge set."""
    best = None
    verts = list(range(n))
    for perm in itertools.permutations(verts):
        relab = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        if best is None or relab < best:
            best = relab
    return best


def _canonical_digraph(n, arcs):
    best = None
    for perm in itertools.permutations(range(n)):
        relab = tuple(sorted((perm[a], perm[b]) for a, b in arcs))
        if best is None or relab < best:
            best = relab
    return best


def _connected(n, edges):
    if n == 1:
        return True
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def _acyclic(n, arcs):
    indeg = Counter()
    adj = {i: [] for i in range(n)}
    for a, b in arcs:
        adj[a].append(b)
        indeg[b] += 1
    queue = [i for i in range(n) if indeg[i] == 0]
    out = 0
    while queue:
        x = queue.pop()
        out += 1
        for y in adj[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                queue.append(y)
    return out == n


def exhaustive_small_corpus(max_n=5):
    """Every connected DAG orientation of every connected planar graph on <= max_n vertices.

    Graphs and orientations are deduplicated up to isomorphism (brute-force
    canonical forms; fine for n <= 5). Returns edge lists with string tokens.
    """
    instances = []
    for n in range(2, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        seen_graphs = set()
        for mask in range(1 << len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            if len(edges) < n - 1 or not _connected(n, edges):
                continue
            canon = _canonical_graph(n, edges)
            if canon in seen_graphs:
                continue
            seen_graphs.add(canon)
            gnx = nx.Graph(list(canon))
            if not nx.check_planarity(gnx)[0]:
                continue
            seen_digraphs = set()
            edges = list(canon)
            for omask in range(1 << len(edges)):
                arcs = [(a, b) if omask >> i & 1 else (b, a)
                        for i, (a, b) in enumerate(edges)]
                if not _acyclic(n, arcs):
                    continue
                dcanon = _canonical_digraph(n, arcs)
                if dcanon in seen_digraphs:
                    continue
                seen_digraphs.add(dcanon)
                instances.append([(f"v{a}", f"v{b}") for a, b in dcanon])
    return instances


def random_corpus(count=500, seed=CORPUS_SEED, n_range=(6, 8), max_edges=12, max_degree=5):
    """Seeded random connected planar DAGs, sized for the oracle guard."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(*n_range)
        order = list(range(n))
        rng.shuffle(order)  # topological order; orienting along it keeps acyclicity
        rank = {v: i for i, v in enumerate(order)}
        edges = set()
        for i in range(1, n):
            j = rng.randrange(i)
            edges.add(tuple(sorted((order[i], order[j]))))
        target = rng.randint(n - 1, max_edges)
        tries = 0
        while len(edges) < target and tries < 50:
            tries += 1
            a, b = rng.sample(range(n), 2)
            e = tuple(sorted((a, b)))
            if e in edges:
                continue
            deg = Counter()
            for x, y in edges | {e}:
                deg[x] += 1
                deg[y] += 1
            if max(deg.values()) > max_degree:
                continue
            if nx.check_planarity(nx.Graph(list(edges | {e})))[0]:
                edges.add(e)
        arcs = sorted((a, b) if rank[a] < rank[b] else (b, a) for a, b in edges)
        out.append([(f"v{a}", f"v{b}") for a, b in arcs])
    return out


def corpus(seed=CORPUS_SEED, random_count=500):
    """The full test corpus as Digraph instances."""
    return [validate_dag(e) for e in exhaustive_small_corpus()] + \
           [validate_dag(e) for e in random_corpus(random_count, seed)]
