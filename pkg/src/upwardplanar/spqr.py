"""SPQR trees of biconnected digraphs, rooted at a reference edge.

Construction goes through the classical unrooted triconnected-components
decomposition: split the underlying multigraph at split pairs until every
piece is a bond, a polygon, or a three-connected graph, then merge adjacent
bonds with bonds and polygons with polygons. The result is unique, so
rebuilding with a different root edge permutes the same components. The
rooted tree then follows the recursive Q/S/P/R formulation: each node's
skeleton excludes the edge leading to its parent.

Desk-scale inputs: split pairs are found by brute force (quadratic), which is
drastically simpler to verify than the linear-time algorithm.
"""

from collections import Counter, defaultdict

import networkx as nx

from .digraph import Digraph
from .embedding import PlanarEmbedding
from .errors import NonPlanarSkeleton, NotBiconnected

# component edge: (x, y, tag) where tag is ("real", block edge index) or
# ("virt", link id). Link ids are shared by exactly two components.


def _vertices(edges):
    vs = set()
    for x, y, _ in edges:
        vs.add(x)
        vs.add(y)
    return vs


def _components_without(edges, x, y):
    """Connected components of the graph minus {x, y}, as vertex sets."""
    adj = defaultdict(set)
    for a, b, _ in edges:
        if a not in (x, y) and b not in (x, y):
            adj[a].add(b)
            adj[b].add(a)
        elif a not in (x, y):
            adj[a]
        elif b not in (x, y):
            adj[b]
    comps = []
    seen = set()
    for v in sorted(adj):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        seen.add(v)
        while stack:
            w = stack.pop()
            for z in adj[w]:
                if z not in seen:
                    seen.add(z)
                    comp.add(z)
                    stack.append(z)
        comps.append(comp)
    return comps


def _split_once(edges, next_link):
    """Split at one split pair; returns (piece, rest, link) or None if none exists."""
    verts = sorted(_vertices(edges))
    if len(verts) == 2:
        return None  # bond
    # parallel edges first
    bundles = defaultdict(list)
    for e in edges:
        bundles[frozenset((e[0], e[1]))].append(e)
    for key in sorted(bundles, key=sorted):
        group = bundles[key]
        if len(group) >= 2 and len(group) < len(edges):
            x, y = sorted(key)
            link = next_link()
            piece = group + [(x, y, ("virt", link))]
            rest = [e for e in edges if frozenset((e[0], e[1])) != key]
            rest.append((x, y, ("virt", link)))
            return piece, rest, link
    # separation pairs
    degs = Counter()
    for a, b, _ in edges:
        degs[a] += 1
        degs[b] += 1
    if all(degs[v] == 2 for v in verts):
        return None  # polygon
    for i, x in enumerate(verts):
        for y in verts[i + 1:]:
            comps = _components_without(edges, x, y)
            if len(comps) < 2:
                continue
            comp = comps[0]
            piece = [e for e in edges if e[0] in comp or e[1] in comp]
            rest = [e for e in edges if not (e[0] in comp or e[1] in comp)]
            link = next_link()
            piece.append((x, y, ("virt", link)))
            rest.append((x, y, ("virt", link)))
            return piece, rest, link
    return None


def _classify(edges):
    verts = _vertices(edges)
    if len(verts) == 2:
        return "bond"
    degs = Counter()
    for a, b, _ in edges:
        degs[a] += 1
        degs[b] += 1
    if all(d == 2 for d in degs.values()):
        return "polygon"
    return "rigid"


def triconnected_components(edges):
    """Unique triconnected components of a biconnected multigraph."""
    counter = [0]

    def next_link():
        counter[0] += 1
        return counter[0]

    work = [list(edges)]
    leaves = []
    while work:
        g = work.pop()
        res = _split_once(g, next_link)
        if res is None:
            leaves.append(g)
        else:
            piece, rest, _ = res
            work.append(piece)
            work.append(rest)

    # merge adjacent same-type components (bond+bond, polygon+polygon)
    comps = {i: c for i, c in enumerate(leaves)}
    changed = True
    while changed:
        changed = False
        by_link = defaultdict(list)
        for ci, c in comps.items():
            for e in c:
                if e[2][0] == "virt":
                    by_link[e[2][1]].append(ci)
        for link, owners in sorted(by_link.items()):
            if len(owners) != 2:
                continue
            a, b = owners
            if a == b:
                continue
            ka, kb = _classify(comps[a]), _classify(comps[b])
            if ka == kb and ka in ("bond", "polygon"):
                merged = [e for e in comps[a] + comps[b] if e[2] != ("virt", link)]
                comps[a] = merged
                del comps[b]
                changed = True
                break
    return list(comps.values())


class SpqrNode:
    """One node of a rooted SPQR tree.

    ``poles`` is the ordered (u, v) pair; shapes in ``feasible`` are relative
    to that order. ``skeleton`` lists oriented (x, y) slots, parallel to
    ``children``; Q-nodes instead carry the real directed edge in ``edge``.
    """

    def __init__(self, kind, poles):
        self.kind = kind
        self.poles = poles
        self.skeleton = []
        self.children = []
        self.edge = None          # Q-nodes: the real (tail, head) edge
        self.pertinent_edges = None
        self.feasible = None
        self.note = {}

    def __repr__(self):
        return f"SpqrNode({self.kind}, poles={self.poles})"

    def pertinent(self, block):
        return Digraph(sorted(self.pertinent_edges))

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


class SpqrTree:
    def __init__(self, block, root_edge):
        self.block = block
        self.root_edge = root_edge
        self.root = None

    def nodes(self):
        return list(self.root.walk())

    def dump(self):
        lines = []

        def rec(node, depth):
            skel = ""
            if node.kind in ("S", "P", "R"):
                skel = " skeleton-edges=[" + ", ".join(
                    f"({x},{y})" for x, y, in node.skeleton) + "]"
            elif node.kind == "Q":
                skel = f" edge=({node.edge[0]}->{node.edge[1]})"
            lines.append("  " * depth +
                         f"node {id(node) % 10000:04d} kind={node.kind} "
                         f"poles=({node.poles[0]},{node.poles[1]})" + skel)
            for c in node.children:
                rec(c, depth + 1)

        rec(self.root, 0)
        return "\n".join(lines)


def is_biconnected(g):
    if g.n < 2 or g.m < 1:
        return False
    if g.n == 2:
        return g.m >= 1
    und = nx.Graph()
    und.add_edges_from((t, h) for t, h in g.edges)
    return nx.is_biconnected(und)


def build_spqr(block, root_edge, binarize=True):
    """SPQR tree of a biconnected digraph rooted at the Q-node of root_edge."""
    if root_edge not in block.edge_set():
        raise ValueError(f"root edge {root_edge} not in block")
    if not is_biconnected(block):
        raise NotBiconnected(f"{block!r} is not biconnected")
    tree = SpqrTree(block, root_edge)
    u, v = root_edge

    if block.m == 1:
        root = SpqrNode("Q", (u, v))
        root.edge = root_edge
        root.pertinent_edges = {root_edge}
        tree.root = root
        return tree

    edges = [(t, h, ("real", i)) for i, (t, h) in enumerate(block.edges)]
    comps = triconnected_components(edges)
    by_link = defaultdict(list)
    root_comp = None
    root_slot = None
    for ci, comp in enumerate(comps):
        for e in comp:
            if e[2][0] == "virt":
                by_link[e[2][1]].append(ci)
            elif block.edges[e[2][1]] == root_edge:
                root_comp, root_slot = ci, e

    root = SpqrNode("Q", (u, v))
    root.edge = root_edge
    child = _build_node(comps, by_link, block, root_comp, root_slot, (u, v))
    root.children = [child]
    root.skeleton = [(u, v)]
    root.pertinent_edges = set(child.pertinent_edges) | {root_edge}
    tree.root = root
    if binarize:
        binarize_s_nodes(tree)
    return tree


def _build_node(comps, by_link, block, ci, entry, poles):
    comp = comps[ci]
    kind = _classify(comp)
    rest = [e for e in comp if e is not entry]
    u, v = poles
    node_kind = {"bond": "P", "polygon": "S", "rigid": "R"}[kind]
    node = SpqrNode(node_kind, poles)

    if node_kind == "S":
        slots = _order_path(rest, u, v)
    elif node_kind == "P":
        slots = [((u, v), e) for e in sorted(rest, key=lambda e: str(e[2]))]
    else:
        slots = []
        for e in sorted(rest, key=lambda e: (str(min(e[0], e[1], key=str)), str(max(e[0], e[1], key=str)))):
            x, y = (e[0], e[1]) if str(e[0]) <= str(e[1]) else (e[1], e[0])
            slots.append(((x, y), e))

    pert = set()
    for (x, y), e in slots:
        node.skeleton.append((x, y))
        if e[2][0] == "real":
            q = SpqrNode("Q", (x, y))
            q.edge = block.edges[e[2][1]]
            q.pertinent_edges = {q.edge}
            node.children.append(q)
            pert.add(q.edge)
        else:
            link = e[2][1]
            other = [c for c in by_link[link] if c != ci]
            assert len(other) == 1, f"link {link} owners {by_link[link]}"
            oc = other[0]
            oentry = next(ee for ee in comps[oc] if ee[2] == ("virt", link))
            sub = _build_node(comps, by_link, block, oc, oentry, (x, y))
            node.children.append(sub)
            pert |= sub.pertinent_edges
    node.pertinent_edges = pert
    return node


def _order_path(edges, u, v):
    """Order path edges from u to v, orienting each slot along the walk."""
    adj = defaultdict(list)
    for e in edges:
        adj[e[0]].append(e)
        adj[e[1]].append(e)
    slots = []
    cur, prev_e = u, None
    while cur != v:
        nxt_edges = [e for e in adj[cur] if e is not prev_e]
        assert len(nxt_edges) == 1, f"not a path at {cur}"
        e = nxt_edges[0]
        nxt = e[1] if e[0] == cur else e[0]
        slots.append(((cur, nxt), e))
        cur, prev_e = nxt, e
    return slots


def binarize_s_nodes(tree):
    """Nest S-node children left-deep so every S-node has exactly two."""

    def rec(node):
        for i, c in enumerate(node.children):
            node.children[i] = rec(c)
        if node.kind == "S" and len(node.children) > 2:
            left = node.children[0]
            left_slot = node.skeleton[0]
            for i in range(1, len(node.children) - 1):
                new = SpqrNode("S", (node.poles[0], node.skeleton[i][1]))
                new.skeleton = [left_slot, node.skeleton[i]]
                new.children = [left, node.children[i]]
                new.pertinent_edges = set(left.pertinent_edges) | set(node.children[i].pertinent_edges)
                left = new
                left_slot = (node.poles[0], node.skeleton[i][1])
            top = SpqrNode("S", node.poles)
            top.skeleton = [left_slot, node.skeleton[-1]]
            top.children = [left, node.children[-1]]
            top.pertinent_edges = node.pertinent_edges
            return top
        return node

    tree.root = rec(tree.root)
    return tree


def pertinent(tree, node):
    """The pertinent digraph of a node plus its ordered poles."""
    return Digraph(sorted(node.pertinent_edges)), node.poles


def skeleton_flips(node):
    """The two pole-external embeddings of an R-node skeleton (mirror pair).

    The skeleton plus the parent edge is three-connected and planar, so it has
    a unique embedding up to reflection; removing the parent edge merges its
    two faces into the outer face containing both poles.
    """
    u, v = node.poles
    g = nx.Graph()
    for x, y in node.skeleton:
        g.add_edge(x, y)
    assert not g.has_edge(u, v), "R-node skeleton cannot contain a pole-pole edge"
    g.add_edge(u, v)
    ok, nx_emb = nx.check_planarity(g)
    if not ok:
        raise NonPlanarSkeleton(f"R-node skeleton at poles {node.poles} is non-planar")
    data = nx_emb.get_data()
    slot_of = {}
    for x, y in node.skeleton:
        slot_of[frozenset((x, y))] = (x, y)
    slot_of[frozenset((u, v))] = (u, v)
    rotation = {}
    for w, nbrs in data.items():
        rotation[w] = [slot_of[frozenset((w, z))] for z in nbrs]
    # drop the parent edge; the merged face is the unique one containing u and v
    rotation[u] = [e for e in rotation[u] if e != (u, v)]
    rotation[v] = [e for e in rotation[v] if e != (u, v)]
    emb = PlanarEmbedding(rotation)
    emb.outer = _outer_with(emb, u, v)
    mirror = emb.mirror()
    mirror.outer = _outer_with(mirror, u, v)
    return [emb, mirror]


def _outer_with(emb, u, v):
    cands = [fi for fi, walk in enumerate(emb.faces) if u in walk and v in walk]
    assert len(cands) == 1, f"expected a unique face with both poles, got {cands}"
    return cands[0]
