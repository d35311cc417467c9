"""R-node subprocedure via dynamic programming over the embedding graph.

The skeleton's embedding is combinatorialized: true vertices, one edge-vertex
per virtual edge, one face-vertex per face. A pair (alpha, beta) assigns each
active switch vertex the place of its large angle and each edge-vertex a
shape from its child's feasible set; the pair is valid iff face sums come out
right (Validity 1), pole angles of selected shapes respect alpha (Validity 2),
and the outer face matches the target shape (Validity 3). The DP runs over a
nice tree decomposition of the embedding graph with the outer face-vertex
pinned into every bag.

Angles at non-switch true vertices can be flat or small depending on the
shapes chosen for the two incident virtual edges, so the embedding graph is
augmented with an edge between consecutive edge-vertices around every such
vertex; each angle's quadruple {v, e_i, e_j, f} then forms a clique and its
score contribution is evaluated inside a common bag.
"""

import itertools
from collections import defaultdict

from .embedding import split_outer_face
from .shapes import FeasibleSet, ShapeDescription, is_coherent

TRACE = None

ASSIGNED = "A"
TODO = "T"


# ---------------------------------------------------------------------------
# Embedding graph


class EmbeddingGraph:
    """Tripartite combinatorization of an embedded skeleton.

    Vertices are ("t", w), ("e", ci), ("f", fi); adjacency covers the
    subdivided skeleton plus vertex-face and edge-face incidences, and the
    augmentation edges between consecutive edge-vertices around non-active
    true vertices. Quadruples list, per such angle, (w, ci, cj, fi).
    """

    def __init__(self, skeleton, emb, active):
        self.emb = emb
        self.outer = ("f", emb.outer)
        skel_vertices = sorted({x for e in skeleton for x in e}, key=str)
        self.true_vertices = [("t", w) for w in skel_vertices]
        self.edge_vertices = [("e", ci) for ci in range(len(skeleton))]
        self.face_vertices = [("f", fi) for fi in range(len(emb.faces))]
        self.adj = defaultdict(set)
        slot_of = {frozenset(e): ci for ci, e in enumerate(skeleton)}

        def connect(a, b):
            self.adj[a].add(b)
            self.adj[b].add(a)

        for ci, (x, y) in enumerate(skeleton):
            connect(("e", ci), ("t", x))
            connect(("e", ci), ("t", y))
        for fi, walk in enumerate(emb.faces):
            k = len(walk)
            for i in range(k):
                connect(("f", fi), ("t", walk[i]))
                side = frozenset((walk[i], walk[(i + 1) % k]))
                connect(("f", fi), ("e", slot_of[side]))

        self.quadruples = []
        for fi, walk in enumerate(emb.faces):
            k = len(walk)
            for i in range(k):
                w = walk[i]
                if w in active:
                    continue
                ci = slot_of[frozenset((walk[(i - 1) % k], w))]
                cj = slot_of[frozenset((w, walk[(i + 1) % k]))]
                connect(("e", ci), ("e", cj))
                self.quadruples.append((w, ci, cj, fi))

    def vertices(self):
        return self.true_vertices + self.edge_vertices + self.face_vertices


# ---------------------------------------------------------------------------
# Tree decompositions


def min_fill_order(adj):
    g = {v: set(ns) for v, ns in adj.items()}
    order = []
    while g:
        best, best_fill = None, None
        for v in sorted(g, key=str):
            ns = g[v]
            fill = sum(1 for a, b in itertools.combinations(sorted(ns, key=str), 2)
                       if b not in g[a])
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        order.append(best)
        ns = g.pop(best)
        for a in ns:
            g[a].discard(best)
            for b in ns:
                if a != b:
                    g[a].add(b)
    return order


def exact_order(adj, upper):
    """Exact treewidth via memoized elimination search; None if above upper-1."""
    verts = sorted(adj, key=str)
    n = len(verts)
    if n > 12:
        return None
    idx = {v: i for i, v in enumerate(verts)}
    bits = [0] * n
    for v, ns in adj.items():
        for w in ns:
            bits[idx[v]] |= 1 << idx[w]

    from functools import lru_cache

    def neighbors_in(v, remaining):
        # neighbors of v in the fill graph when `remaining` is left: standard
        # characterization: reachable vertices of the eliminated set plus
        # direct neighbors, i.e. N(v) within remaining after contracting the
        # eliminated part.
        seen = 1 << v
        stack = [v]
        nbrs = 0
        while stack:
            x = stack.pop()
            cand = bits[x] & ~seen
            while cand:
                b = cand & -cand
                cand ^= b
                j = b.bit_length() - 1
                seen |= b
                if remaining >> j & 1:
                    nbrs |= b
                else:
                    stack.append(j)
        return nbrs

    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(remaining):
        if remaining == 0:
            return -1, ()
        best_w, best_ord = None, None
        cand = remaining
        while cand:
            b = cand & -cand
            cand ^= b
            v = b.bit_length() - 1
            deg = bin(neighbors_in(v, remaining & ~b)).count("1")
            w, rest = best(remaining & ~b)
            w = max(w, deg)
            if best_w is None or w < best_w:
                best_w, best_ord = w, (v,) + rest
        return best_w, best_ord

    w, order = best(full)
    if w > upper:
        return None
    return [verts[i] for i in order]


class NiceNode:
    __slots__ = ("kind", "bag", "children", "vertex")

    def __init__(self, kind, bag, children=(), vertex=None):
        self.kind = kind  # leaf | introduce | forget | join
        self.bag = frozenset(bag)
        self.children = list(children)
        self.vertex = vertex

    def walk_post(self):
        for c in self.children:
            yield from c.walk_post()
        yield self


class NiceTreeDecomposition:
    def __init__(self, root, width):
        self.root = root
        self.width = width

    def nodes_post(self):
        return list(self.root.walk_post())


def decomposition_from_order(adj, order):
    """Bags of the elimination game, linked into a tree."""
    g = {v: set(ns) for v, ns in adj.items()}
    pos = {v: i for i, v in enumerate(order)}
    bags = []
    for v in order:
        bag = {v} | set(g[v])
        bags.append(bag)
        ns = g.pop(v)
        for a in ns:
            g[a].discard(v)
            for b in ns:
                if a != b:
                    g[a].add(b)
    parent = {}
    for i, v in enumerate(order):
        later = [w for w in bags[i] if w != v]
        if later:
            parent[i] = pos[min(later, key=lambda w: pos[w])]
    return bags, parent


def build_nice_td(adj, pinned, strategy="auto"):
    """Nice tree decomposition of adj with `pinned` inside every non-root bag."""
    verts = sorted(adj, key=str)
    if strategy == "trivial":
        order = list(verts)
        bags, parent = [set(verts)], {}
    else:
        order = min_fill_order(adj)
        width = max(
            (len(b) - 1 for b in decomposition_from_order(adj, order)[0]), default=0)
        if width <= 6:
            better = exact_order(adj, width)
            if better is not None:
                order = better
        bags, parent = decomposition_from_order(adj, order)
    bags = [set(b) | {pinned} for b in bags]

    children = defaultdict(list)
    roots = []
    for i in range(len(bags)):
        if i in parent:
            children[parent[i]].append(i)
        else:
            roots.append(i)
    assert len(roots) == 1, "embedding graphs are connected"

    def chain(lower, target_bag):
        """Forget/introduce chain transforming lower.bag into target_bag."""
        node = lower
        for v in sorted(node.bag - target_bag, key=str):
            if v == pinned:
                continue
            node = NiceNode("forget", node.bag - {v}, [node], v)
        for v in sorted(target_bag - node.bag, key=str):
            node = NiceNode("introduce", node.bag | {v}, [node], v)
        return node

    def leaf_chain(target_bag):
        node = NiceNode("leaf", {pinned})
        return chain(node, target_bag)

    def build(i):
        bag = bags[i]
        subs = [chain(build(c), bag) for c in children[i]]
        if not subs:
            return leaf_chain(bag)
        node = subs[0]
        for other in subs[1:]:
            node = NiceNode("join", bag, [node, other])
        return node

    top = build(roots[0])
    for v in sorted(top.bag - {pinned}, key=str):
        top = NiceNode("forget", top.bag - {v}, [top], v)
    top = NiceNode("forget", frozenset(), [top], pinned)
    width = max(len(n.bag) for n in top.walk_post()) - 1
    td = NiceTreeDecomposition(top, width)
    check_td(td, adj, pinned)
    return td


def check_td(td, adj, pinned):
    """Validate the tree-decomposition axioms and niceness."""
    nodes = td.nodes_post()
    covered = set()
    for n in nodes:
        for a in n.bag:
            for b in n.bag:
                if a != b and b in adj.get(a, ()):
                    covered.add(frozenset((a, b)))
        if n.kind == "leaf":
            assert n.bag == {pinned} and not n.children
        elif n.kind == "introduce":
            assert len(n.children) == 1 and n.bag == n.children[0].bag | {n.vertex}
            assert n.vertex not in n.children[0].bag
        elif n.kind == "forget":
            assert len(n.children) == 1 and n.bag == n.children[0].bag - {n.vertex}
            assert n.vertex in n.children[0].bag
        elif n.kind == "join":
            assert len(n.children) == 2
            assert all(c.bag == n.bag for c in n.children)
    want = {frozenset((a, b)) for a, ns in adj.items() for b in ns}
    assert covered == want, "some edge is not covered by any bag"
    assert td.root.bag == frozenset()
    # connectivity: for each vertex, the nodes containing it form a subtree
    parent_ix = {}
    stack = [(td.root, None)]
    flat = []
    while stack:
        n, p = stack.pop()
        ix = len(flat)
        flat.append(n)
        parent_ix[id(n)] = p
        for c in n.children:
            stack.append((c, ix))
    holds = defaultdict(set)
    for ix, n in enumerate(flat):
        for v in n.bag:
            holds[v].add(ix)
    for v, ixs in holds.items():
        tops = 0
        for ix in ixs:
            p = parent_ix[id(flat[ix])]
            if p is None or v not in flat[p].bag:
                tops += 1
        assert tops == 1, f"{v} appears in {tops} disjoint subtrees"


# ---------------------------------------------------------------------------
# The valid-pair DP


class DPEngine:
    """One valid-pair dynamic program per (R-node, skeleton flip).

    Pole-facing data (the outer angle labels at the poles and the four
    boundary edge orientations) is accumulated into the records instead of
    being checked against a fixed target, so a single pass produces every
    realizable shape with witnesses; valid_pair_dp filters the results.
    """

    def __init__(self, ctx, emb, zeta=None, td_strategy="auto"):
        self.ctx = ctx
        self.emb = emb
        self.zeta = zeta if zeta is not None else ctx.g_mu.n
        u, v = ctx.poles
        self.active = {w for w in ctx.skel_vertices if ctx.is_switch_mu(w)}
        self.eg = EmbeddingGraph(ctx.skeleton, emb, self.active)
        self.outer_id = emb.outer
        self.f_l = {}
        self.f_r = {}
        for ci, (x, y) in enumerate(ctx.skeleton):
            self.f_r[ci] = emb.side_face[(x, y)]
            self.f_l[ci] = emb.side_face[(y, x)]
        slot_of = {frozenset(e): ci for ci, e in enumerate(ctx.skeleton)}
        sp = split_outer_face(emb, u, v)
        self.left_slots = {slot_of[frozenset(s)] for s in sp.left_sides}
        self.right_slots = {slot_of[frozenset(s)] for s in sp.right_sides}
        self.left_verts = {w for _, w in sp.left_angles}
        self.right_verts = {w for _, w in sp.right_angles}
        # pole rho fields set at the introduction of the four boundary slots
        self.rho_fields = defaultdict(list)
        for slot_list, fields in (
                (sp.left_sides, ("rho_lu", "rho_lv")),
                (sp.right_sides, ("rho_ru", "rho_rv"))):
            for side, field, pole in ((slot_list[0], fields[0], u),
                                      (slot_list[-1], fields[1], v)):
                ci = slot_of[frozenset(side)]
                self.rho_fields[ci].append((field, pole))
        self.pole_fields = ("lam_u", "lam_v", "rho_lu", "rho_ru", "rho_lv", "rho_rv")
        self.field_ix = {f: i for i, f in enumerate(self.pole_fields)}
        # quadruples with precomputed sides and outer-path membership
        self.quads_by_vertex = defaultdict(list)
        for (w, ci, cj, fi) in self.eg.quadruples:
            info = (w, ci, self._side(ci, fi), cj, self._side(cj, fi), fi)
            for member in (("t", w), ("e", ci), ("e", cj), ("f", fi)):
                self.quads_by_vertex[member].append(info)
        self.specials = {w: ctx.special_child_at(w)
                         for w in ctx.skel_vertices if not ctx.is_switch_mu(w)}
        self.td = build_nice_td(self.eg.adj, ("f", emb.outer), td_strategy)
        self._results = None

    def _side(self, ci, fi):
        if self.f_l[ci] == fi:
            return "l"
        assert self.f_r[ci] == fi
        return "r"

    def pole_letter(self, ci, w):
        return self.ctx.child_pole(ci, w)

    def _orientation(self, ci, side, w, shape):
        """Direction at w of the boundary edge of child ci on the given side."""
        if self.specials.get(w) == ci:
            return shape.rho_at(self.pole_letter(ci, w), side)
        return self.ctx.normal_dir(w)

    def _quad_lambda(self, info, shapes):
        w, ci, side_i, cj, side_j, fi = info
        d1 = self._orientation(ci, side_i, w, shapes[ci])
        d2 = self._orientation(cj, side_j, w, shapes[cj])
        return 0 if d1 != d2 else -1

    def _v2_ok(self, w, ci, shape, points_here):
        lam = shape.lam_at(self.pole_letter(ci, w))
        if w in self.active:
            return lam == (-1 if points_here else 1)
        if len(self.ctx.dirs_at(ci, w)) == 2:
            return lam in (-1, 0)
        return lam == 1

    def _turn(self, shape, ci, fi):
        return shape.tau_l if self._side(ci, fi) == "l" else shape.tau_r

    # ----- record helpers -----

    def run(self):
        if self._results is not None:
            return self._results
        table = {}
        for node in self.td.nodes_post():
            recs = {}
            if node.kind == "leaf":
                rec = ((), (), ((self.outer_id, 0),), 0, 0, (None,) * 6)
                recs[rec] = (None, None, ())
            elif node.kind == "introduce":
                child = table[id(node.children[0])]
                for rec, _ in child.items():
                    for new, info in self._introduce(node, rec):
                        recs.setdefault(new, (rec, None, info))
            elif node.kind == "forget":
                child = table[id(node.children[0])]
                for rec, _ in child.items():
                    new = self._forget(node, rec)
                    if new is not None:
                        recs.setdefault(new, (rec, None, ()))
            elif node.kind == "join":
                left = table[id(node.children[0])]
                right = table[id(node.children[1])]
                for r1 in left:
                    for r2 in right:
                        new = self._join(node, r1, r2)
                        if new is not None:
                            recs.setdefault(new, (r1, r2, ()))
            table[id(node)] = recs
            if TRACE is not None:
                TRACE.write(f"dp {node.kind} bag={len(node.bag)} records={len(recs)}\n")
        self._table = table
        results = {}
        for rec in table[id(self.td.root)]:
            _, _, _, left, right, pole = rec
            assert all(p is not None for p in pole), "pole data incomplete at root"
            shape = ShapeDescription(left, right, *pole)
            if is_coherent(shape) and shape not in results:
                results[shape] = self._traceback(rec)
        self._results = results
        return results

    def _traceback(self, root_rec):
        alpha = {}
        beta = {}
        stack = [(self.td.root, root_rec)]
        while stack:
            node, rec = stack.pop()
            prev1, prev2, info = self._table[id(node)][rec]
            for kind, key, val in info:
                if kind == "beta":
                    beta.setdefault(key, val)
                elif kind == "alpha" and val != TODO:
                    alpha.setdefault(key, val)
            if prev1 is not None:
                stack.append((node.children[0], prev1))
            if prev2 is not None:
                stack.append((node.children[1], prev2))
        return alpha, beta

    # ----- transitions -----

    def _introduce(self, node, rec):
        x = node.vertex
        bag = node.children[0].bag
        angle, shape, score, left, right, pole = rec
        angle_d, shape_d, score_d = dict(angle), dict(shape), dict(score)
        kind, payload = x
        out = []
        if kind == "t":
            w = payload
            if w in self.active:
                targets = [t for t in sorted(self.eg.adj[x] & bag, key=str)] + [TODO]
                for target in targets:
                    res = self._intro_active(x, w, target, bag, angle_d, shape_d,
                                             score_d, left, right, pole)
                    if res is not None:
                        out.append(res)
            else:
                res = self._intro_passive(x, w, bag, angle_d, shape_d, score_d,
                                          left, right, pole)
                if res is not None:
                    out.append(res)
        elif kind == "e":
            ci = payload
            for s in self.ctx.child_sets[ci]:
                res = self._intro_edge(x, ci, s, bag, angle_d, shape_d, score_d,
                                       left, right, pole)
                if res is not None:
                    out.append(res)
        else:
            fi = payload
            out.extend(self._intro_face(x, fi, bag, angle_d, shape_d, score_d,
                                        left, right, pole))
        return out

    def _quad_contrib(self, x, bag_after, shapes, score_d, left, right, pole):
        """Contributions of quadruples completed by introducing x; None on a
        3b conflict (never: pole values are recorded, not checked here)."""
        u, v = self.ctx.poles
        for info in self.quads_by_vertex[x]:
            w, ci, _, cj, _, fi = info
            quad = {("t", w), ("e", ci), ("e", cj), ("f", fi)}
            if not quad <= bag_after:
                continue
            lam = self._quad_lambda(info, shapes)
            score_d[fi] = score_d.get(fi, 0) + lam
            if fi == self.outer_id:
                if w in self.left_verts:
                    left += lam
                elif w in self.right_verts:
                    right += lam
                if w == u:
                    pole = self._set_pole(pole, "lam_u", lam)
                elif w == v:
                    pole = self._set_pole(pole, "lam_v", lam)
                if pole is None:
                    return None
        return score_d, left, right, pole

    def _set_pole(self, pole, field, value):
        ix = self.field_ix[field]
        if pole[ix] is not None and pole[ix] != value:
            return None
        if pole[ix] == value:
            return pole
        return pole[:ix] + (value,) + pole[ix + 1:]

    def _pack(self, angle_d, shape_d, score_d, left, right, pole, info):
        if abs(left) > self.zeta or abs(right) > self.zeta:
            return None
        for val in score_d.values():
            if abs(val) > self.zeta:
                return None
        return ((tuple(sorted(angle_d.items(), key=str)),
                 tuple(sorted(shape_d.items())),
                 tuple(sorted(score_d.items())),
                 left, right, pole), info)

    def _intro_active(self, x, w, target, bag, angle_d, shape_d, score_d,
                      left, right, pole):
        angle_d = dict(angle_d)
        score_d = dict(score_d)
        angle_d[x] = target
        for nb in self.eg.adj[x] & bag:
            nk, npay = nb
            if nk == "e":
                if npay in shape_d and not self._v2_ok(
                        w, npay, shape_d[npay], target == nb):
                    return None
            elif nk == "f":
                lam = 1 if target == nb else -1
                score_d[npay] = score_d.get(npay, 0) + lam
                if npay == self.outer_id:
                    if w in self.left_verts:
                        left += lam
                    elif w in self.right_verts:
                        right += lam
        return self._pack(angle_d, shape_d, score_d, left, right, pole,
                          (("alpha", w, target),))

    def _intro_passive(self, x, w, bag, angle_d, shape_d, score_d,
                       left, right, pole):
        bag_after = bag | {x}
        res = self._quad_contrib(x, bag_after, shape_d, dict(score_d), left,
                                 right, pole)
        if res is None:
            return None
        score_d, left, right, pole = res
        for nb in self.eg.adj[x] & bag:
            if nb[0] == "e" and nb[1] in shape_d:
                if not self._v2_ok(w, nb[1], shape_d[nb[1]], False):
                    return None
        return self._pack(angle_d, shape_d, score_d, left, right, pole, ())

    def _intro_edge(self, x, ci, s, bag, angle_d, shape_d, score_d,
                    left, right, pole):
        angle_d = dict(angle_d)
        shape_d = dict(shape_d)
        score_d = dict(score_d)
        shape_d[ci] = s
        info = [("beta", ci, s)]
        # forced angle transitions and Validity 2 for true neighbors in the bag
        for nb in sorted(self.eg.adj[x] & bag, key=str):
            nk, npay = nb
            if nk != "t":
                continue
            w = npay
            lam = s.lam_at(self.pole_letter(ci, w))
            if w in self.active:
                cur = angle_d.get(nb)
                if cur is None:
                    continue  # neighbor not in bag record? cannot happen
                if lam == -1:
                    if cur == TODO:
                        angle_d[nb] = x
                        info.append(("alpha", w, x))
                    else:
                        return None
                else:
                    if cur == x:
                        return None  # fresh vertex; unreachable
            else:
                if not self._v2_ok(w, ci, s, False):
                    return None
        # face score contributions
        for fi in (self.f_l[ci], self.f_r[ci]):
            if ("f", fi) in bag:
                t = self._turn(s, ci, fi)
                score_d[fi] = score_d.get(fi, 0) + t
                if fi == self.outer_id:
                    if ci in self.left_slots:
                        left += t
                    elif ci in self.right_slots:
                        right += t
        for field, pole_vertex in self.rho_fields.get(ci, ()):
            val = s.rho_at(self.pole_letter(ci, pole_vertex),
                           self._side(ci, self.outer_id))
            pole = self._set_pole(pole, field, val)
            if pole is None:
                return None
        res = self._quad_contrib(x, bag | {x}, shape_d, score_d, left, right, pole)
        if res is None:
            return None
        score_d, left, right, pole = res
        return self._pack(angle_d, shape_d, score_d, left, right, pole, tuple(info))

    def _intro_face(self, x, fi, bag, angle_d, shape_d, score_d, left, right, pole):
        score_d = dict(score_d)
        score_d[fi] = 0
        total = 0
        todo_actives = []
        for nb in sorted(self.eg.adj[x] & bag, key=str):
            nk, npay = nb
            if nk == "e" and npay in shape_d:
                total += self._turn(shape_d[npay], npay, fi)
            elif nk == "t" and npay in self.active:
                if angle_d.get(nb) == TODO:
                    todo_actives.append(nb)
                else:
                    total -= 1  # the large angle is already placed elsewhere
        score_d[fi] = total
        res = self._quad_contrib(x, bag | {x}, shape_d, score_d, left, right, pole)
        if res is None:
            return []
        score_d, left, right, pole = res
        out = []
        for point_mask in range(1 << len(todo_actives)):
            a2 = dict(angle_d)
            s2 = dict(score_d)
            info = []
            for i, nb in enumerate(todo_actives):
                if point_mask >> i & 1:
                    a2[nb] = x
                    s2[fi] += 1
                    info.append(("alpha", nb[1], x))
                else:
                    s2[fi] -= 1
            packed = self._pack(a2, shape_d, s2, left, right, pole, tuple(info))
            if packed is not None:
                out.append(packed)
        return out

    def _forget(self, node, rec):
        x = node.vertex
        angle, shape, score, left, right, pole = rec
        angle_d, shape_d, score_d = dict(angle), dict(shape), dict(score)
        kind, payload = x
        u, v = self.ctx.poles
        if kind == "t":
            w = payload
            if w in self.active:
                target = angle_d.pop(x)
                if target == TODO:
                    return None
                if w in (u, v):
                    lam = 1 if target == ("f", self.outer_id) else -1
                    pole = self._set_pole(pole, "lam_u" if w == u else "lam_v", lam)
                    if pole is None:
                        return None
        elif kind == "e" or kind == "f":
            if kind == "e":
                shape_d.pop(payload)
            else:
                val = score_d.pop(payload)
                want = 2 if payload == self.outer_id else -2
                if val != want:
                    return None
            for key, tgt in list(angle_d.items()):
                if tgt == x:
                    angle_d[key] = ASSIGNED
        packed = self._pack(angle_d, shape_d, score_d, left, right, pole, ())
        return packed[0] if packed else None

    def _join(self, node, r1, r2):
        a1, s1, sc1, l1, rt1, p1 = r1
        a2, s2, sc2, l2, rt2, p2 = r2
        if s1 != s2:
            return None
        a1d, a2d = dict(a1), dict(a2)
        merged_angle = {}
        for key in a1d:
            x, y = a1d[key], a2d[key]
            if x == y:
                if x == ASSIGNED:
                    return None  # assigned in two disjoint pasts
                merged_angle[key] = x
            elif x == TODO and y == ASSIGNED:
                merged_angle[key] = ASSIGNED
            elif x == ASSIGNED and y == TODO:
                merged_angle[key] = ASSIGNED
            else:
                return None
        pole = list(p1)
        for i, val in enumerate(p2):
            if val is None:
                continue
            if pole[i] is None:
                pole[i] = val
            elif pole[i] != val:
                return None
        pole = tuple(pole)
        shapes = dict(s1)
        bag = node.bag
        # corr terms: contributions computable entirely inside the bag were
        # accumulated in both branches
        score_d = {}
        for fi, val in dict(sc1).items():
            score_d[fi] = val + dict(sc2)[fi] - self._corr_face(fi, bag, shapes,
                                                               merged_angle)
        left = l1 + l2 - self._corr_path(bag, shapes, merged_angle, "left")
        right = rt1 + rt2 - self._corr_path(bag, shapes, merged_angle, "right")
        packed = self._pack(merged_angle, shapes, score_d, left, right, pole, ())
        return packed[0] if packed else None

    def _corr_face(self, fi, bag, shapes, angle_d):
        x = ("f", fi)
        total = 0
        for nb in self.eg.adj[x] & bag:
            nk, npay = nb
            if nk == "e":
                total += self._turn(shapes[npay], npay, fi)
            elif nk == "t" and npay in self.active:
                total += 1 if angle_d.get(nb) == x else -1
        for info in self.quads_by_vertex[x]:
            w, ci, _, cj, _, _ = info
            if {("t", w), ("e", ci), ("e", cj)} <= bag:
                total += self._quad_lambda(info, shapes)
        return total

    def _corr_path(self, bag, shapes, angle_d, which):
        slots = self.left_slots if which == "left" else self.right_slots
        verts = self.left_verts if which == "left" else self.right_verts
        total = 0
        outer = ("f", self.outer_id)
        for nb in self.eg.adj[outer] & bag:
            nk, npay = nb
            if nk == "e" and npay in slots:
                total += self._turn(shapes[npay], npay, self.outer_id)
            elif nk == "t" and npay in verts:
                if npay in self.active:
                    total += 1 if angle_d.get(nb) == outer else -1
        for info in self.quads_by_vertex[outer]:
            w, ci, _, cj, _, fi = info
            if fi != self.outer_id or w not in verts:
                continue
            if {("t", w), ("e", ci), ("e", cj)} <= bag:
                total += self._quad_lambda(info, shapes)
        return total


# ---------------------------------------------------------------------------
# Public entry points


def embedding_graph(skeleton, emb, active):
    """The embedding graph of a skeleton embedding (see EmbeddingGraph)."""
    return EmbeddingGraph(skeleton, emb, active)


def tree_decomposition(adj, pinned, strategy="auto"):
    return build_nice_td(adj, pinned, strategy)


def _engines(ctx, zeta=None, td_strategy="auto"):
    key = ("tw_engines", zeta, td_strategy)
    if key not in ctx.node.note:
        ctx.node.note[key] = [DPEngine(ctx, emb, zeta, td_strategy)
                              for emb in ctx.flips]
    return ctx.node.note[key]


def valid_pair_dp(ctx, flip_index, psi, zeta=None, td_strategy="auto"):
    """A valid pair realizing psi on the given flip, or None."""
    eng = _engines(ctx, zeta, td_strategy)[flip_index]
    return eng.run().get(psi)


def validate_pair(ctx, flip_index, psi, alpha, beta):
    """Standalone check of Validity Conditions 1-3, independent of the DP."""
    emb = ctx.flips[flip_index]
    active = {w for w in ctx.skel_vertices if ctx.is_switch_mu(w)}
    u, v = ctx.poles
    f_l, f_r = {}, {}
    for ci, (x, y) in enumerate(ctx.skeleton):
        f_r[ci] = emb.side_face[(x, y)]
        f_l[ci] = emb.side_face[(y, x)]
    slot_of = {frozenset(e): ci for ci, e in enumerate(ctx.skeleton)}
    specials = {w: ctx.special_child_at(w)
                for w in ctx.skel_vertices if w not in active}

    def side(ci, fi):
        return "l" if f_l[ci] == fi else "r"

    def pole_letter(ci, w):
        return ctx.child_pole(ci, w)

    def orientation(ci, w, fi):
        if specials.get(w) == ci:
            return beta[ci].rho_at(pole_letter(ci, w), side(ci, fi))
        return ctx.normal_dir(w)

    def lam_alpha(w, fi, walk, i):
        k = len(walk)
        if w in active:
            return 1 if alpha.get(w) == ("f", fi) else -1
        ci = slot_of[frozenset((walk[(i - 1) % k], w))]
        cj = slot_of[frozenset((w, walk[(i + 1) % k]))]
        return 0 if orientation(ci, w, fi) != orientation(cj, w, fi) else -1

    # Validity 1
    for fi, walk in enumerate(emb.faces):
        k = len(walk)
        total = 0
        seen_slots = set()
        for i in range(k):
            ci = slot_of[frozenset((walk[i], walk[(i + 1) % k]))]
            assert ci not in seen_slots
            seen_slots.add(ci)
            s = beta[ci]
            total += s.tau_l if side(ci, fi) == "l" else s.tau_r
        for i in range(k):
            total += lam_alpha(walk[i], fi, walk, i)
        want = 2 if fi == emb.outer else -2
        if total != want:
            return False, f"validity 1 fails at face {fi}: {total} != {want}"

    # Validity 2
    for ci, (x, y) in enumerate(ctx.skeleton):
        s = beta[ci]
        for w in (x, y):
            lam = s.lam_at(pole_letter(ci, w))
            if w in active:
                want_minus = alpha.get(w) == ("e", ci)
                if lam != (-1 if want_minus else 1):
                    return False, f"validity 2a fails at ({w}, slot {ci})"
            else:
                if len(ctx.dirs_at(ci, w)) == 2:
                    if lam not in (-1, 0):
                        return False, f"validity 2b fails at ({w}, slot {ci})"
                elif lam != 1:
                    return False, f"validity 2b fails at ({w}, slot {ci})"

    # Validity 3
    sp = split_outer_face(emb, u, v)
    walk = emb.faces[emb.outer]
    k = len(walk)

    def path_sum(sides, angles):
        total = 0
        for sd in sides:
            ci = slot_of[frozenset(sd)]
            s = beta[ci]
            total += s.tau_l if side(ci, emb.outer) == "l" else s.tau_r
        for i, w in angles:
            total += lam_alpha(w, emb.outer, walk, i)
        return total

    if path_sum(sp.left_sides, sp.left_angles) != psi.tau_l:
        return False, "validity 3a fails on the left path"
    if path_sum(sp.right_sides, sp.right_angles) != psi.tau_r:
        return False, "validity 3a fails on the right path"
    if lam_alpha(u, emb.outer, walk, sp.pole_angle_u) != psi.lam_u:
        return False, "validity 3b fails at the first pole"
    if lam_alpha(v, emb.outer, walk, sp.pole_angle_v) != psi.lam_v:
        return False, "validity 3b fails at the second pole"
    checks = (
        (sp.left_sides[0], u, psi.rho_lu),
        (sp.right_sides[0], u, psi.rho_ru),
        (sp.left_sides[-1], v, psi.rho_lv),
        (sp.right_sides[-1], v, psi.rho_rv),
    )
    for sd, w, want in checks:
        ci = slot_of[frozenset(sd)]
        if beta[ci].rho_at(pole_letter(ci, w), side(ci, emb.outer)) != want:
            return False, f"validity 3c fails at slot {ci}"
    return True, "ok"


_MEMO = {}


def r_node_treewidth(ctx, zeta=None, td_strategy="auto"):
    """The treewidth R-node subprocedure: one DP pass per flip."""
    key = (ctx.memo_key(), zeta, td_strategy)
    if key in _MEMO:
        shapes, witnesses = _MEMO[key]
        ctx.node.note["tw_witnesses"] = witnesses
        out = FeasibleSet(ctx.tau_min, ctx.tau_max)
        for s in shapes:
            out.insert(s)
        return out
    if len(_MEMO) > 5000:
        _MEMO.clear()
    out = FeasibleSet(ctx.tau_min, ctx.tau_max)
    witnesses = {}
    for flip_index, eng in enumerate(_engines(ctx, zeta, td_strategy)):
        for shape, (alpha, beta) in sorted(eng.run().items(), key=lambda kv: str(kv[0])):
            if not (ctx.tau_min <= shape.tau_l <= ctx.tau_max
                    and ctx.tau_min <= shape.tau_r <= ctx.tau_max):
                continue
            ok, why = validate_pair(ctx, flip_index, shape, alpha, beta)
            assert ok, f"DP produced an invalid pair for {shape}: {why}"
            if shape not in witnesses:
                witnesses[shape] = (flip_index, alpha, beta)
            out.insert(shape)
    ctx.node.note["tw_witnesses"] = witnesses
    _MEMO[key] = (out.shapes(), witnesses)
    return out
