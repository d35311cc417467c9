"""The bottom-up SPQR framework: Q/S/P/root procedures and the decision driver.

Every tree node gets a feasible set: the shape descriptions of all pole
external upward planar embeddings of its pertinent graph, restricted to a
turn-number window. S and P nodes are composed combinatorially; R nodes are
delegated to a pluggable subprocedure (see rnode_flow and rnode_tw). The
single-connected driver walks the block-cut tree and checks, for every
choice of root block, that leaf blocks can be attached at their cut vertices.
"""

from collections import defaultdict

from .digraph import (
    SOURCE,
    TOP,
    Digraph,
    block_cut_tree,
    classify,
    expand,
    is_switch,
    special_edge_in,
)
from .errors import NonPlanarSkeleton, NotThinRepeat
from .shapes import (
    IN,
    OUT,
    FeasibleSet,
    ShapeDescription,
    is_coherent,
    is_thin,
)
from .spqr import build_spqr, skeleton_flips

SAUSAGE = ShapeDescription(0, 0, 1, 1, OUT, OUT, IN, IN)
INV_SAUSAGE = ShapeDescription(0, 0, 1, 1, IN, IN, OUT, OUT)


def q_node_feasible(edge, poles, tau_min, tau_max):
    """Singleton set: the sausage oriented by the edge direction vs pole order."""
    fs = FeasibleSet(tau_min, tau_max)
    if edge == tuple(poles):
        fs.insert(SAUSAGE)
    else:
        assert edge == (poles[1], poles[0])
        fs.insert(INV_SAUSAGE)
    return fs


def s_node_feasible(f1, f2, tau_min, tau_max):
    """Series composition of two feasible sets sharing the middle pole.

    The two angles created at the shared pole are flat when the meeting
    boundary-edge orientations differ, otherwise small or large; two large
    angles at one vertex are impossible. A candidate is kept iff the
    composed tuple is coherent, which encodes UP1-UP3 at the join.
    """
    out = FeasibleSet(tau_min, tau_max)
    for s1 in f1:
        for s2 in f2:
            l_opts = (0,) if s1.rho_lv != s2.rho_lu else (-1, 1)
            r_opts = (0,) if s1.rho_rv != s2.rho_ru else (-1, 1)
            for lam_l in l_opts:
                for lam_r in r_opts:
                    if lam_l + lam_r >= 2:
                        continue
                    cand = ShapeDescription(
                        s1.tau_l + s2.tau_l + lam_l,
                        s1.tau_r + s2.tau_r + lam_r,
                        s1.lam_u, s2.lam_v,
                        s1.rho_lu, s1.rho_ru, s2.rho_lv, s2.rho_rv)
                    if is_coherent(cand):
                        out.insert_clamped(cand)
    return out


# ---------------------------------------------------------------------------
# Shape sequences (parallel compositions)


class SeqItem:
    """A maximal run of equal shapes in a shape sequence."""

    __slots__ = ("shape", "members")

    def __init__(self, shape, members):
        self.shape = shape
        self.members = list(members)  # child ids, len >= 1

    @property
    def count(self):
        return len(self.members)

    def key(self):
        return (self.shape, frozenset(self.members))


def _merge_items(items):
    out = []
    for it in items:
        if out and out[-1].shape == it.shape:
            out[-1] = SeqItem(it.shape, out[-1].members + it.members)
        else:
            out.append(SeqItem(it.shape, list(it.members)))
    return out


def shape_sequence_check(elements, special_u=None, special_v=None):
    """All composed shapes realizable with exactly this left-to-right sequence.

    ``elements`` is the reduced sequence as (shape, multiplicity) pairs;
    repeated elements must satisfy the thin conditions (NotThinRepeat
    otherwise). ``special_u``/``special_v`` give the index of the element
    whose component contains the pole's special edge, or None when the pole
    is a switch vertex of the composition. Enumerates the admissible pole
    angle labelings in the faces between consecutive elements and keeps
    those passing UP1-UP3.
    """
    items = [SeqItem(s, range(c)) for s, c in elements]
    for s, c in elements:
        if c >= 2 and not is_thin(s):
            raise NotThinRepeat(f"repeated element {s} is not thin")
    return _sequence_shapes(items, special_u, special_v)


def _sequence_shapes(items, su_idx, sv_idx):
    r = len(items)
    if r == 0:
        return set()
    total = sum(it.count for it in items)
    for it in items:
        if it.count >= 2 and not is_thin(it.shape):
            return set()
    if total == 1:
        return {items[0].shape}

    u_opts = _pole_labelings(items, su_idx, "u")
    v_opts = _pole_labelings(items, sv_idx, "v")
    shapes = set()
    first, last = items[0].shape, items[-1].shape
    for lab_u in u_opts:
        for lab_v in v_opts:
            ok = True
            for i in range(r - 1):
                s_i, s_j = items[i].shape, items[i + 1].shape
                if s_i.tau_r + s_j.tau_l + lab_u[i] + lab_v[i] != -2:
                    ok = False
                    break
            if not ok:
                continue
            cand = ShapeDescription(
                first.tau_l, last.tau_r, lab_u[r - 1], lab_v[r - 1],
                first.rho_lu, last.rho_ru, first.rho_lv, last.rho_rv)
            if is_coherent(cand):
                shapes.add(cand)
    return shapes


def _pole_labelings(items, sp_idx, pole):
    """Labelings of the pole's angles in the r-1 gap faces plus the outer face.

    Returns a list of tuples; entry i < r-1 is the label in the face between
    items i and i+1, entry r-1 the label in the outer face.
    """
    r = len(items)
    rho_l = [it.shape.rho_at(pole, "l") for it in items]
    rho_r = [it.shape.rho_at(pole, "r") for it in items]
    lam = [it.shape.lam_at(pole) for it in items]
    flat = [rho_r[i] != rho_l[i + 1] for i in range(r - 1)]
    flat.append(rho_l[0] != rho_r[r - 1])  # outer angle

    if sp_idx is None:
        # pole is a switch vertex of the composition
        if any(flat):
            return []
        if any(l == 0 for l in lam):
            return []
        internal_large = sum(it.count for it in items if it.shape.lam_at(pole) == -1)
        if internal_large > 1:
            return []
        if internal_large == 1:
            return [tuple([-1] * r)]
        out = []
        for big in range(r):
            out.append(tuple(1 if i == big else -1 for i in range(r)))
        return out

    # pole is a non-switch vertex; the special element fixes everything
    sp_lam = lam[sp_idx]
    for i, l in enumerate(lam):
        if i != sp_idx and l != 1:
            return []
    flats_inside = {-1: 2, 0: 1, 1: 0}[sp_lam]
    if sum(flat) != 2 - flats_inside:
        return []
    return [tuple(0 if flat[i] else -1 for i in range(r))]


def shape_sequence_extend(items, child, shape, special_u=None, special_v=None):
    """All single-insertion extensions of a sequence with one more component.

    Returns a list of (new_items, shapes) pairs; insertions adjacent to an
    equal element merge into its run (valid only when the shape is thin).
    """
    out = []
    seen = set()
    for gap in range(len(items) + 1):
        new = _merge_items(items[:gap] + [SeqItem(shape, [child])] + items[gap:])
        key = tuple(it.key() for it in new)
        if key in seen:
            continue
        seen.add(key)
        if any(it.count >= 2 and not is_thin(it.shape) for it in new):
            continue
        su = _locate_special(new, special_u)
        sv = _locate_special(new, special_v)
        shapes = _sequence_shapes(new, su, sv)
        out.append((new, shapes))
    return out


def _locate_special(items, special_child):
    if special_child is None:
        return None
    for i, it in enumerate(items):
        if special_child in it.members:
            return i
    return None


# ---------------------------------------------------------------------------
# P-node


class PoleContext:
    """Pole data a parallel composition needs: normal directions and specials."""

    def __init__(self, rho_u, rho_v, special_child_u, special_child_v):
        self.rho_u = rho_u
        self.rho_v = rho_v
        self.special_child_u = special_child_u
        self.special_child_v = special_child_v

    @property
    def odd_templates(self):
        # normal components have odd turn numbers iff the boundary
        # orientations at the two poles coincide
        return self.rho_u == self.rho_v


def pole_context_for(g_mu, poles, child_edge_sets):
    """Derive the PoleContext of a parallel composition from its pertinent graph."""
    u, v = poles

    def normal_dir(w):
        kind = classify(g_mu, w)
        return OUT if kind in (SOURCE, TOP) else IN

    def special_child(w):
        e = special_edge_in(g_mu, w)
        if e is None:
            return None
        for ci, es in enumerate(child_edge_sets):
            if e in es:
                return ci
        raise AssertionError(f"special edge {e} not in any child")

    return PoleContext(normal_dir(u), normal_dir(v), special_child(u), special_child(v))


def p_node_feasible(child_sets, ctx, tau_min, tau_max):
    """Parallel composition of k >= 2 children sharing both poles.

    Follows the three-step procedure: greedily realize a thin backbone
    [s1*, s2*, s3*], extend it with the at most two children that fit no
    backbone shape, then repair unmatched turn numbers by moving one thin
    component's shape to the boundary (including the double-mismatch case
    with the four boundary shapes). Every composed shape that validates is
    accumulated; unrealizable combinations simply contribute nothing.
    """
    out = FeasibleSet(tau_min, tau_max)
    if any(not fs for fs in child_sets):
        return out
    k = len(child_sets)
    assert k >= 2

    def template(c):
        return ShapeDescription(c, -c, 1, 1, ctx.rho_u, ctx.rho_u, ctx.rho_v, ctx.rho_v)

    def add_all(shapes):
        for s in shapes:
            out.insert_clamped(s)

    def validated(items):
        su = _locate_special(items, ctx.special_child_u)
        sv = _locate_special(items, ctx.special_child_v)
        return _sequence_shapes(items, su, sv)

    want_parity = 1 if ctx.odd_templates else 0
    cprimes = sorted({c if abs(c % 2) == want_parity else c - 1
                      for c in range(tau_min, tau_max + 1)})

    for cp in cprimes:
        templates = [template(cp - 2 * i) for i in range(3)]
        if not is_coherent(templates[0]):
            continue
        for sel_mask in range(8):
            sel = [i for i in range(3) if sel_mask >> i & 1]
            assign = _greedy_assign(child_sets, templates, sel)
            if assign is None:
                continue
            members, unassigned = assign
            if len(unassigned) > 2:
                continue
            base = [SeqItem(templates[i], members[i]) for i in sel if members[i]]
            if any(not members[i] for i in sel):
                continue  # repair failed upstream
            seqs = [base]
            for child in unassigned:
                nxt = []
                for seq in seqs:
                    for s in child_sets[child]:
                        for new, shapes in shape_sequence_extend(
                                seq, child, s, ctx.special_child_u, ctx.special_child_v):
                            nxt.append(new)
                seqs = _dedup_seqs(nxt)
            for seq in seqs:
                add_all(validated(seq))
                _step3_repairs(seq, sel, templates, child_sets, ctx, add_all, validated)
    return out


def _dedup_seqs(seqs):
    seen = set()
    out = []
    for seq in seqs:
        key = tuple(it.key() for it in seq)
        if key not in seen:
            seen.add(key)
            out.append(seq)
    return out


def _greedy_assign(child_sets, templates, sel):
    """First-fit assignment of children to the selected backbone templates.

    Returns ({template index: member list}, unassigned children), repaired so
    every selected template has at least one member, or None when no repair
    exists.
    """
    members = {i: [] for i in sel}
    assigned_to = {}
    unassigned = []
    for ci, fs in enumerate(child_sets):
        for ti in sel:
            if templates[ti] in fs:
                members[ti].append(ci)
                assigned_to[ci] = ti
                break
        else:
            unassigned.append(ci)
    if not sel:
        return members, unassigned

    def move_one(dst):
        # move some child into template dst, keeping every donor nonempty
        for src in sel:
            if src == dst or len(members[src]) < 2:
                continue
            for ci in members[src]:
                if templates[dst] in child_sets[ci]:
                    members[src].remove(ci)
                    members[dst].append(ci)
                    assigned_to[ci] = dst
                    return True
        return False

    for ti in sel:
        if not members[ti] and not move_one(ti):
            return None
    return members, unassigned


def _remove_child(items, child):
    res = []
    for it in items:
        if child in it.members:
            rest = [m for m in it.members if m != child]
            if rest:
                res.append(SeqItem(it.shape, rest))
        else:
            res.append(it)
    return _merge_items(res)


def _step3_repairs(seq, sel, templates, child_sets, ctx, add_all, validated):
    """Move one backbone component's shape to the front or back, or two to both."""
    backbone = sorted({m for it in seq if it.shape in templates for m in it.members})
    tshapes = set(templates)
    order = {templates[i]: i for i in range(3)}

    def refill(items, missing, banned):
        """Sequences obtained by moving a spare member into the missing template."""
        out = []
        for it in items:
            if it.shape not in tshapes or it.count < 2:
                continue
            for donor in it.members:
                if donor in banned or missing not in child_sets[donor]:
                    continue
                moved = _remove_child(items, donor)
                pos = 0
                for i, jt in enumerate(moved):
                    if jt.shape in order and order[jt.shape] < order[missing]:
                        pos = i + 1
                out.append(_merge_items(
                    moved[:pos] + [SeqItem(missing, [donor])] + moved[pos:]))
        return _dedup_seqs(out)

    def removals(child):
        """Remove child from the backbone, restoring emptied templates if possible."""
        items = _remove_child(seq, child)
        present = {it.shape for it in items}
        missing = [templates[i] for i in sel if templates[i] not in present]
        if not missing:
            return [items]
        if len(missing) > 1:
            return []
        return refill(items, missing[0], {child})

    for child in backbone:
        for s in child_sets[child]:
            if s in tshapes:
                continue
            for rem in removals(child):
                add_all(validated(_merge_items([SeqItem(s, [child])] + rem)))
                add_all(validated(_merge_items(rem + [SeqItem(s, [child])])))

    # double mismatch: wrap the remaining sequence with a pair of the four
    # boundary shapes (one pole's large angle moves inside on each end)
    cp = templates[0].tau_l
    ru, rv = ctx.rho_u, ctx.rho_v
    t_l_u = ShapeDescription(cp, -cp + 2, -1, 1, ru, ru, rv, rv)
    t_l_v = ShapeDescription(cp, -cp + 2, 1, -1, ru, ru, rv, rv)
    t_r_u = ShapeDescription(cp - 2, -cp + 4, -1, 1, ru, ru, rv, rv)
    t_r_v = ShapeDescription(cp - 2, -cp + 4, 1, -1, ru, ru, rv, rv)
    for front, back in ((t_l_u, t_r_v), (t_l_v, t_r_u)):
        for x in backbone:
            if front not in child_sets[x]:
                continue
            for y in backbone:
                if y == x or back not in child_sets[y]:
                    continue
                mid = _remove_child(_remove_child(seq, x), y)
                add_all(validated(_merge_items(
                    [SeqItem(front, [x])] + mid + [SeqItem(back, [y])])))


# ---------------------------------------------------------------------------
# R-node plumbing and the biconnected procedure


class RNodeContext:
    """Everything an R-node subprocedure may consult.

    Child feasible sets are indexed like the skeleton slots; direction
    tables describe how each child's pertinent edges meet the skeleton
    vertices, which determines switch-ness and special components in the
    pertinent graph of the node.
    """

    def __init__(self, node, tau_min, tau_max):
        self.node = node
        self.poles = node.poles
        self.tau_min = tau_min
        self.tau_max = tau_max
        self.skeleton = list(node.skeleton)
        self.children = node.children
        self.child_sets = [c.feasible for c in node.children]
        self.g_mu = Digraph(sorted(node.pertinent_edges))
        self.sigma_mu = sum(1 for s in self.g_mu.sources() if s not in node.poles)
        self.skel_vertices = sorted({x for e in self.skeleton for x in e}, key=str)
        self._dirs = defaultdict(set)
        for ci, child in enumerate(node.children):
            for (t, h) in child.pertinent_edges:
                self._dirs[(ci, t)].add(OUT)
                self._dirs[(ci, h)].add(IN)
        self._flips = None
        self._key = None

    @property
    def flips(self):
        if self._flips is None:
            self._flips = skeleton_flips(self.node)
        return self._flips

    def dirs_at(self, ci, w):
        return self._dirs[(ci, w)]

    def is_switch_mu(self, w):
        return is_switch(self.g_mu, w)

    def normal_dir(self, w):
        """Direction of the non-special edges at w within the pertinent graph."""
        return OUT if classify(self.g_mu, w) in (SOURCE, TOP) else IN

    def special_child_at(self, w):
        e = special_edge_in(self.g_mu, w)
        if e is None:
            return None
        for ci, child in enumerate(self.children):
            if e in child.pertinent_edges:
                return ci
        raise AssertionError(f"special edge {e} of {w} not found in any child")

    def child_pole(self, ci, w):
        """'u' or 'v' depending on which pole of child ci the vertex w is."""
        x, y = self.skeleton[ci]
        if w == x:
            return "u"
        assert w == y
        return "v"

    def memo_key(self):
        """Everything an R-node subprocedure's result can depend on.

        Two contexts with equal keys describe the same subproblem: same
        skeleton slots, child feasible sets, per-pole edge directions,
        internal-source counts and turn window.
        """
        if self._key is None:
            slots = []
            for ci, (x, y) in enumerate(self.skeleton):
                child = self.children[ci]
                g = child.pertinent(self.g_mu)
                interesting = any(s not in (x, y) for s in g.sources())
                slots.append((x, y,
                              tuple(sorted(self.child_sets[ci], key=str)),
                              tuple(sorted(self._dirs[(ci, x)])),
                              tuple(sorted(self._dirs[(ci, y)])),
                              interesting))
            self._key = (self.poles, tuple(slots), self.sigma_mu,
                         self.g_mu.n, self.tau_min, self.tau_max)
        return self._key


def _compute_node(node, subprocedure, tau_min, tau_max):
    for child in node.children:
        _compute_node(child, subprocedure, tau_min, tau_max)
    if node.kind == "Q":
        node.feasible = q_node_feasible(node.edge, node.poles, tau_min, tau_max)
    elif node.kind == "S":
        assert len(node.children) == 2
        node.feasible = s_node_feasible(
            node.children[0].feasible, node.children[1].feasible, tau_min, tau_max)
    elif node.kind == "P":
        g_mu = Digraph(sorted(node.pertinent_edges))
        ctx = pole_context_for(
            g_mu, node.poles, [c.pertinent_edges for c in node.children])
        node.feasible = p_node_feasible(
            [c.feasible for c in node.children], ctx, tau_min, tau_max)
    elif node.kind == "R":
        if any(not c.feasible for c in node.children):
            node.feasible = FeasibleSet(tau_min, tau_max)
        else:
            node.feasible = subprocedure(RNodeContext(node, tau_min, tau_max))
    else:
        raise AssertionError(node.kind)


def root_feasible(tree, subprocedure, tau_min, tau_max):
    """Treat the root Q-node as a P-node over its child and the reference edge."""
    root = tree.root
    u, v = root.poles
    if not root.children:  # single-edge block
        fs = FeasibleSet(tau_min, tau_max)
        fs.insert(SAUSAGE)
        root.feasible = fs
        return fs
    child = root.children[0]
    edge_fs = q_node_feasible(root.edge, root.poles, tau_min, tau_max)
    ctx = pole_context_for(
        tree.block, root.poles,
        [child.pertinent_edges, {root.edge}])
    fs = p_node_feasible([child.feasible, edge_fs], ctx, tau_min, tau_max)
    root.feasible = fs
    return fs


def biconnected_feasible(block, root_edge, subprocedure, tau_min, tau_max,
                         return_tree=False):
    """Shape descriptions of every upward planar embedding of the block with
    root_edge on the outer face, with all turn numbers inside the window."""
    try:
        tree = build_spqr(block, root_edge)
        if tree.root.children:
            _compute_node(tree.root.children[0], subprocedure, tau_min, tau_max)
        fs = root_feasible(tree, subprocedure, tau_min, tau_max)
    except NonPlanarSkeleton:
        fs, tree = FeasibleSet(tau_min, tau_max), None
    if return_tree:
        return fs, tree
    return fs


# ---------------------------------------------------------------------------
# Single-connected driver


class Decision:
    def __init__(self, verdict, sigma, stats=None, rooting=None):
        self.verdict = verdict
        self.sigma = sigma
        self.stats = stats or {}
        self.rooting = rooting  # (root block index, per-block witness info)

    def __bool__(self):
        return self.verdict


def tau_window(block, policy):
    if policy == "sources":
        bound = 2 * len(block.sources()) + 1
    elif policy == "safe":
        bound = block.n + 1
    else:
        raise ValueError(f"unknown tau policy {policy!r}")
    return -bound, bound


def resolve_subprocedure(name, sigma=0):
    if callable(name):
        return name
    if name == "auto":
        name = "sources" if sigma <= 8 else "treewidth"
    if name == "sources":
        from .rnode_flow import r_node_sources
        return r_node_sources
    if name == "treewidth":
        from .rnode_tw import r_node_treewidth
        return r_node_treewidth
    raise ValueError(f"unknown subprocedure {name!r}")


def decide_upward_planar(g, subprocedure="auto", tau_policy="sources"):
    """Branch over root blocks and check the cut-vertex attachment conditions.

    A non-root leaf block must embed with its parent cut vertex v on the
    outer face; when v is a non-switch vertex of the parent block, some such
    embedding must additionally put v's large angle on the outer face.
    """
    eg = expand(g)
    sigma = len(eg.sources())
    sub = resolve_subprocedure(subprocedure, sigma)
    if eg.m == 0:
        return Decision(True, sigma, {"blocks": 0})
    bct = block_cut_tree(eg)
    blocks = bct.blocks
    memo = {}

    def feasible(bi, edge):
        key = (bi, edge)
        if key not in memo:
            lo, hi = tau_window(blocks[bi], tau_policy)
            memo[key] = biconnected_feasible(blocks[bi], edge, sub, lo, hi)
        return memo[key]

    def pole_of(edge, v):
        return "u" if edge[0] == v else "v"

    stats = {
        "blocks": len(blocks),
        "cut_vertices": len(bct.cut_vertices),
        "vertices": eg.n,
        "edges": eg.m,
    }

    for root_bi in range(len(blocks)):
        parent_cut, parent_block = bct.rooted_parents(root_bi)
        rooting = {}
        ok = False
        for edge in sorted(blocks[root_bi].edges):
            fs = feasible(root_bi, edge)
            if fs:
                rooting[root_bi] = (edge, min(fs.shapes(), key=str))
                ok = True
                break
        if not ok:
            continue
        for bi in range(len(blocks)):
            if bi == root_bi:
                continue
            v = parent_cut[bi]
            pb = parent_block[v]
            need_large = not is_switch(blocks[pb], v)
            found = None
            for edge in sorted(blocks[bi].edges):
                if v not in edge:
                    continue
                fs = feasible(bi, edge)
                for s in fs:
                    if not need_large or s.lam_at(pole_of(edge, v)) == 1:
                        found = (edge, s)
                        break
                if found:
                    break
            if not found:
                ok = False
                break
            rooting[bi] = found
        if ok:
            return Decision(True, sigma, stats, (root_bi, rooting))
    return Decision(False, sigma, stats)
