"""Core DAG representation, vertex classification, expansion, block-cut tree."""

from collections import defaultdict, deque

from .errors import CycleFound, Disconnected, DuplicateEdge, SelfLoop, UnknownVertex

SOURCE = "source"
SINK = "sink"
TOP = "top"
BOTTOM = "bottom"
INTERNAL = "internal"


class Digraph:
    """An immutable simple digraph.

    Vertices are opaque string tokens; internally they are mapped to dense
    integer indices (``index_of``) so that algorithms can use array-style
    bookkeeping while file round-trips stay stable.
    """

    def __init__(self, edges, vertices=()):
        seen = {}
        order = []
        for v in vertices:
            if v not in seen:
                seen[v] = len(order)
                order.append(v)
        edge_list = []
        for t, h in edges:
            for v in (t, h):
                if v not in seen:
                    seen[v] = len(order)
                    order.append(v)
            edge_list.append((t, h))
        self.vertices = tuple(order)
        self.edges = tuple(edge_list)
        self.index_of = seen
        self.out_edges = {v: [] for v in order}
        self.in_edges = {v: [] for v in order}
        for i, (t, h) in enumerate(edge_list):
            self.out_edges[t].append(i)
            self.in_edges[h].append(i)

    def __contains__(self, v):
        return v in self.index_of

    def __len__(self):
        return len(self.vertices)

    @property
    def n(self):
        return len(self.vertices)

    @property
    def m(self):
        return len(self.edges)

    def outdeg(self, v):
        return len(self.out_edges[v])

    def indeg(self, v):
        return len(self.in_edges[v])

    def degree(self, v):
        return self.indeg(v) + self.outdeg(v)

    def neighbors(self, v):
        for i in self.out_edges[v]:
            yield self.edges[i][1]
        for i in self.in_edges[v]:
            yield self.edges[i][0]

    def incident(self, v):
        """Edge indices incident to v (out first, then in)."""
        return self.out_edges[v] + self.in_edges[v]

    def sources(self):
        return [v for v in self.vertices if self.indeg(v) == 0]

    def sinks(self):
        return [v for v in self.vertices if self.outdeg(v) == 0]

    def subgraph(self, edge_indices):
        """New Digraph over the given edges (vertex set = their endpoints)."""
        return Digraph([self.edges[i] for i in sorted(edge_indices)])

    def edge_set(self):
        return frozenset(self.edges)

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"


class ExpandedDigraph(Digraph):
    """A digraph produced by :func:`expand`.

    ``special_edge`` maps each split vertex to the fresh edge joining its two
    halves; ``origin`` maps every vertex back to the input vertex it came from.
    """

    def __init__(self, edges, special_edge, origin):
        super().__init__(edges)
        self.special_edge = dict(special_edge)
        self.origin = dict(origin)


def validate_dag(raw_edges):
    """Check a raw edge list and return a Digraph, or raise a structured error.

    Accepts iterables of (tail, head) pairs. Rejects self-loops, duplicate
    edges, directed cycles (with a witness cycle) and disconnected inputs.
    """
    edges = []
    seen = set()
    for t, h in raw_edges:
        t, h = str(t), str(h)
        if t == h:
            raise SelfLoop(t)
        if (t, h) in seen:
            raise DuplicateEdge((t, h))
        seen.add((t, h))
        edges.append((t, h))
    g = Digraph(edges)
    _check_acyclic(g)
    _check_connected(g)
    return g


def _check_acyclic(g):
    indeg = {v: g.indeg(v) for v in g.vertices}
    queue = deque(v for v in g.vertices if indeg[v] == 0)
    removed = 0
    while queue:
        v = queue.popleft()
        removed += 1
        for i in g.out_edges[v]:
            h = g.edges[i][1]
            indeg[h] -= 1
            if indeg[h] == 0:
                queue.append(h)
    if removed == g.n:
        return
    # Extract a witness cycle from the residual graph: walk forward through
    # vertices with remaining in-degree until a vertex repeats.
    residual = {v for v in g.vertices if indeg[v] > 0}
    v = next(iter(sorted(residual)))
    path, pos = [], {}
    while v not in pos:
        pos[v] = len(path)
        path.append(v)
        v = next(g.edges[i][1] for i in g.out_edges[v] if g.edges[i][1] in residual)
    raise CycleFound(path[pos[v]:])


def _check_connected(g):
    if g.n == 0:
        return
    seen = {g.vertices[0]}
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(seen) != g.n:
        raise Disconnected()


def is_switch(g, v):
    """True if v is a source or a sink of g."""
    return g.indeg(v) == 0 or g.outdeg(v) == 0


def expand(g):
    """Split every non-switch vertex v into v#1 (inherits in-edges) and v#2.

    The fresh edge v#1 -> v#2 is recorded as the special edge of both halves.
    Applying expand to an already expanded digraph returns it unchanged.
    """
    if isinstance(g, ExpandedDigraph):
        return g
    rename_in = {}
    rename_out = {}
    special = {}
    origin = {}
    extra = []
    for v in g.vertices:
        if is_switch(g, v):
            rename_in[v] = rename_out[v] = v
            origin[v] = v
        else:
            v1, v2 = f"{v}#1", f"{v}#2"
            rename_in[v] = v1
            rename_out[v] = v2
            origin[v1] = origin[v2] = v
            extra.append((v1, v2))
    edges = [(rename_out[t], rename_in[h]) for t, h in g.edges] + extra
    for v1, v2 in extra:
        special[v1] = (v1, v2)
        special[v2] = (v1, v2)
    return ExpandedDigraph(edges, special, origin)


def classify(g, v):
    """Classify v as source, sink, top, bottom or internal.

    Degree-2 non-switch vertices count as top vertices. On expanded digraphs
    the result is never "internal".
    """
    if v not in g:
        raise UnknownVertex(v)
    ind, outd = g.indeg(v), g.outdeg(v)
    if ind == 0:
        return SOURCE
    if outd == 0:
        return SINK
    if ind == 1:
        return TOP
    if outd == 1:
        return BOTTOM
    return INTERNAL


def is_top_like(g, v):
    """True if the non-special edges of v in g are outgoing.

    Sources count as top-like and sinks as bottom-like; for non-switch
    vertices this follows the degree-2-is-top convention of :func:`classify`.
    """
    kind = classify(g, v)
    return kind in (SOURCE, TOP)


def special_edge_in(g, v):
    """The unique minority-direction edge of v within g, or None for switches.

    For a top vertex this is its single incoming edge, for a bottom vertex its
    single outgoing edge. Requires g to be expanded (or a subgraph of one).
    """
    kind = classify(g, v)
    if kind == TOP:
        return g.edges[g.in_edges[v][0]]
    if kind == BOTTOM:
        return g.edges[g.out_edges[v][0]]
    if kind == INTERNAL:
        raise ValueError(f"{v!r} has no unique special edge; graph not expanded")
    return None


class BlockCutTree:
    """Biconnected components of a connected graph plus the block-cut tree."""

    def __init__(self, blocks, cut_vertices, tree, root=None):
        self.blocks = blocks              # list of Digraph, induced orientations
        self.cut_vertices = cut_vertices  # set of vertex tokens
        self.tree = tree                  # adjacency: block index <-> cut vertex
        self.root = root                  # optional root block index

    def blocks_at(self, v):
        return [b for b in range(len(self.blocks)) if v in self.blocks[b]]

    def rooted_parents(self, root_block):
        """Map each block to its parent cut vertex for the given rooting.

        Returns (parent_cut, parent_block) dicts; the root block maps to None.
        """
        parent_cut = {root_block: None}
        parent_block = {}
        seen_cut = set()
        queue = deque([("b", root_block)])
        while queue:
            kind, x = queue.popleft()
            if kind == "b":
                for c in self.tree.get(("b", x), ()):
                    if c not in seen_cut:
                        seen_cut.add(c)
                        parent_block[c] = x
                        queue.append(("c", c))
            else:
                for b in self.tree.get(("c", x), ()):
                    if b not in parent_cut:
                        parent_cut[b] = x
                        queue.append(("b", b))
        return parent_cut, parent_block


def block_cut_tree(g):
    """Biconnected decomposition via iterative Hopcroft-Tarjan DFS."""
    disc = {}
    low = {}
    stack = []
    comps = []
    timer = [0]

    adj = {v: [] for v in g.vertices}
    for i, (t, h) in enumerate(g.edges):
        adj[t].append((h, i))
        adj[h].append((t, i))

    for root in g.vertices:
        if root in disc:
            continue
        work = [(root, None, iter(adj[root]))]
        disc[root] = low[root] = timer[0]
        timer[0] += 1
        while work:
            v, pe, it = work[-1]
            advanced = False
            for w, ei in it:
                if ei == pe:
                    continue
                if w not in disc:
                    stack.append(ei)
                    disc[w] = low[w] = timer[0]
                    timer[0] += 1
                    work.append((w, ei, iter(adj[w])))
                    advanced = True
                    break
                elif disc[w] < disc[v]:
                    stack.append(ei)
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    comp = []
                    while True:
                        ei = stack.pop()
                        comp.append(ei)
                        if ei == pe:
                            break
                    comps.append(comp)
        # isolated vertex: no component

    # cut vertices are exactly the vertices lying in more than one block
    blocks = [g.subgraph(c) for c in comps]
    count = defaultdict(int)
    for b in blocks:
        for v in b.vertices:
            count[v] += 1
    cut = {v for v, c in count.items() if c > 1}
    tree = defaultdict(list)
    for bi, b in enumerate(blocks):
        for v in b.vertices:
            if v in cut:
                tree[("b", bi)].append(v)
                tree[("c", v)].append(bi)
    return BlockCutTree(blocks, cut, dict(tree))
