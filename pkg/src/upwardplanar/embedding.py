"""Combinatorial planar embeddings, angle assignments, and the fixed-embedding test.

An embedding is a rotation system (per-vertex clockwise cyclic order of
incident edges) plus a choice of outer face. Faces are traced from the
rotation system; a rotation system is planar iff Euler's formula
V - E + F = 2 holds for the traced faces (connected graphs).
"""

from collections import deque, namedtuple

from .errors import NonPlanarRotation, OddSwitchCount

IN = "in"
OUT = "out"

SWITCH = "switch"
FLAT = "flat"

Angle = namedtuple("Angle", "face index vertex edges kind")


def _und(e):
    return frozenset(e)


class PlanarEmbedding:
    """Rotation system plus outer face, with traced faces and angle tables.

    ``rotation`` maps each vertex to the clockwise cyclic list of its
    incident edges, each edge given as the (tail, head) pair of the digraph.
    Faces are stored as cyclic vertex walks ``[x0, x1, ..., x_{k-1}]`` whose
    sides are (x_i, x_{i+1}).
    """

    def __init__(self, rotation, outer_face_hint=None):
        self.rotation = {v: list(es) for v, es in rotation.items()}
        self._pos = {}
        for v, es in self.rotation.items():
            for i, e in enumerate(es):
                key = (v, _und(e))
                if key in self._pos:
                    raise NonPlanarRotation(f"edge {e} repeated at {v}")
                self._pos[key] = i
        self.faces = trace_faces(self.rotation)
        n = len(self.rotation)
        m = sum(len(es) for es in self.rotation.values()) // 2
        if n - m + len(self.faces) != 2:
            raise NonPlanarRotation(
                f"Euler check failed: V={n} E={m} F={len(self.faces)}")
        self.side_face = {}
        for fi, walk in enumerate(self.faces):
            k = len(walk)
            for i in range(k):
                self.side_face[(walk[i], walk[(i + 1) % k])] = fi
        self.outer = 0
        if outer_face_hint is not None:
            self.outer = self.face_of_walk(outer_face_hint)

    def face_of_walk(self, walk):
        """Face index whose cyclic walk equals the given vertex sequence.

        Exact cyclic matches win; a reversed match is accepted only when it is
        unambiguous (a face and its mirror can both exist, e.g. on a triangle).
        """
        walk = list(walk)
        exact = _cyc(walk)
        matches = [fi for fi, f in enumerate(self.faces) if _cyc(f) == exact]
        if len(matches) == 1:
            return matches[0]
        rev = _cyc(walk[::-1])
        matches += [fi for fi, f in enumerate(self.faces) if _cyc(f) == rev]
        if len(matches) == 1:
            return matches[0]
        raise NonPlanarRotation(f"no unique face matches walk {walk}")

    def other_end(self, v, e):
        t, h = e
        return h if t == v else t

    def edge_at(self, v, i):
        return self.rotation[v][i % len(self.rotation[v])]

    def next_edge(self, v, e):
        i = self._pos[(v, _und(e))]
        return self.edge_at(v, i + 1)

    def prev_edge(self, v, e):
        i = self._pos[(v, _und(e))]
        return self.edge_at(v, i - 1)

    def angles(self):
        """All angles of all faces, as Angle tuples (kind left None)."""
        out = []
        for fi, walk in enumerate(self.faces):
            k = len(walk)
            for i in range(k):
                prv = walk[(i - 1) % k]
                nxt = walk[(i + 1) % k]
                v = walk[i]
                out.append(Angle(fi, i, v, ((prv, v), (v, nxt)), None))
        return out

    def face_angles(self, fi):
        walk = self.faces[fi]
        k = len(walk)
        for i in range(k):
            yield walk[i], (walk[(i - 1) % k], walk[i]), (walk[i], walk[(i + 1) % k])

    def mirror(self):
        """The flipped embedding (all rotations reversed)."""
        return PlanarEmbedding({v: list(reversed(es)) for v, es in self.rotation.items()})


def _cyc(walk):
    k = len(walk)
    best = None
    for s in range(k):
        cand = tuple(walk[s:] + walk[:s])
        if best is None or cand < best:
            best = cand
    return best


def trace_faces(rotation):
    """Trace all faces of a rotation system; returns vertex walks.

    Each directed edge side is visited exactly once: after arriving at y via
    the edge {x, y}, the walk leaves along the successor of that edge in the
    rotation at y.
    """
    pos = {}
    for v, es in rotation.items():
        for i, e in enumerate(es):
            pos[(v, _und(e))] = i
    unused = set()
    for v, es in rotation.items():
        for e in es:
            t, h = e
            w = h if t == v else t
            unused.add((v, w))
    faces = []
    while unused:
        start = min(unused)
        walk = []
        x, y = start
        while (x, y) in unused:
            unused.discard((x, y))
            walk.append(x)
            i = pos[(y, frozenset((x, y)))]
            es = rotation[y]
            nxt = es[(i + 1) % len(es)]
            t, h = nxt
            z = h if t == y else t
            x, y = y, z
        faces.append(walk)
    return faces


def angle_kind(g, angle_vertex, e1, e2):
    """flat iff exactly one of the two boundary edges is incoming at the vertex."""
    d1 = IN if _directed_into(g, e1, angle_vertex) else OUT
    d2 = IN if _directed_into(g, e2, angle_vertex) else OUT
    return FLAT if d1 != d2 else SWITCH


def _directed_into(g, side_edge, v):
    """side_edge is an (x, y) vertex pair; resolve its digraph orientation at v."""
    x, y = side_edge
    if (x, y) in g.edge_set():
        t, h = x, y
    else:
        t, h = y, x
    return h == v


class AngleAssignment:
    """Map from (face, index) angle slots to values in {-1, 0, 1}."""

    def __init__(self, values):
        self.values = dict(values)

    def __getitem__(self, key):
        return self.values[key]

    def items(self):
        return self.values.items()


def check_up_conditions(g, emb, assignment, verbose=False):
    """Test properties UP0-UP3 of an angle assignment.

    Returns True iff all hold; with verbose=True returns (ok, reason).
    """
    per_vertex = {v: [] for v in g.vertices}
    per_face = [[] for _ in emb.faces]
    for fi, walk in enumerate(emb.faces):
        k = len(walk)
        for i in range(k):
            v = walk[i]
            e1 = (walk[(i - 1) % k], v)
            e2 = (v, walk[(i + 1) % k])
            kind = angle_kind(g, v, e1, e2)
            val = assignment[(fi, i)]
            if kind == FLAT and val != 0:
                return _verdict(verbose, False, f"UP0: flat angle at {v} labeled {val}")
            if kind == SWITCH and val not in (-1, 1):
                return _verdict(verbose, False, f"UP0: switch angle at {v} labeled {val}")
            per_vertex[v].append(val)
            per_face[fi].append(val)
    for v, vals in per_vertex.items():
        n1 = vals.count(1)
        n0 = vals.count(0)
        if g.indeg(v) == 0 or g.outdeg(v) == 0:
            if n1 != 1 or n0 != 0:
                return _verdict(verbose, False, f"UP1 fails at {v}: n1={n1} n0={n0}")
        else:
            if n1 != 0 or n0 != 2:
                return _verdict(verbose, False, f"UP2 fails at {v}: n1={n1} n0={n0}")
    for fi, vals in enumerate(per_face):
        n1 = vals.count(1)
        nm1 = vals.count(-1)
        want = nm1 + 2 if fi == emb.outer else nm1 - 2
        if n1 != want:
            return _verdict(verbose, False, f"UP3 fails at face {fi}: n1={n1} n-1={nm1}")
    return _verdict(verbose, True, "ok")


def _verdict(verbose, ok, reason):
    return (ok, reason) if verbose else ok


class FlowNetwork:
    """Bipartite supply/demand network with unit-ish integer capacities."""

    def __init__(self):
        self.supplies = {}
        self.demands = {}
        self.arcs = []

    def add_source(self, node, supply):
        assert supply >= 0
        self.supplies[node] = self.supplies.get(node, 0) + supply

    def add_sink(self, node, demand):
        assert node not in self.demands, f"sink {node} added twice"
        self.demands[node] = demand

    def add_arc(self, src, dst, cap):
        self.arcs.append((src, dst, cap))

    @property
    def total_supply(self):
        return sum(self.supplies.values())

    @property
    def total_demand(self):
        return sum(self.demands.values())


def max_flow(net):
    """Dinic's algorithm; returns (value, per-arc flow list)."""
    index = {}

    def nid(x):
        if x not in index:
            index[x] = len(index)
        return index[x]

    S = nid("__source__")
    T = nid("__sink__")
    graph = []  # adjacency: node -> list of edge ids
    to = []
    cap = []

    def add(u, v, c):
        to.append(v)
        cap.append(c)
        to.append(u)
        cap.append(0)

    for node, s in sorted(net.supplies.items(), key=lambda kv: str(kv[0])):
        add(S, nid(node), s)
    for node, d in sorted(net.demands.items(), key=lambda kv: str(kv[0])):
        add(nid(node), T, d)
    arc_eid = []
    for src, dst, c in net.arcs:
        arc_eid.append(len(to))
        add(nid(src), nid(dst), c)

    nv = len(index)
    graph = [[] for _ in range(nv)]
    for eid in range(0, len(to), 2):
        u = to[eid + 1]
        graph[u].append(eid)
        graph[to[eid]].append(eid + 1)

    flow = 0
    while True:
        level = [-1] * nv
        level[S] = 0
        q = deque([S])
        while q:
            u = q.popleft()
            for eid in graph[u]:
                if cap[eid] > 0 and level[to[eid]] < 0:
                    level[to[eid]] = level[u] + 1
                    q.append(to[eid])
        if level[T] < 0:
            break
        it = [0] * nv

        def dfs(u, pushed):
            if u == T:
                return pushed
            while it[u] < len(graph[u]):
                eid = graph[u][it[u]]
                v = to[eid]
                if cap[eid] > 0 and level[v] == level[u] + 1:
                    got = dfs(v, min(pushed, cap[eid]))
                    if got:
                        cap[eid] -= got
                        cap[eid ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            pushed = dfs(S, 1 << 60)
            if not pushed:
                break
            flow += pushed

    per_arc = [cap[eid ^ 1] for eid in arc_eid]
    return flow, per_arc


def orientation_changes(g, emb, v):
    """Number of in/out alternations around v in the rotation (even)."""
    es = emb.rotation[v]
    dirs = [IN if _directed_into(g, e, v) else OUT for e in es]
    return sum(1 for i in range(len(dirs)) if dirs[i] != dirs[(i + 1) % len(dirs)])


def fixed_embedding_test(g, emb):
    """Theorem-2 style test: does some angle assignment make (g, emb) upward planar?

    Builds the switch-vertex / face flow network: each switch vertex supplies
    one unit (its large angle), each face f demands n_f/2 - 1 units (n_f/2 + 1
    for the outer face) where n_f counts switch angles of f. Returns a
    satisfying AngleAssignment or None.
    """
    switch = {v for v in g.vertices if g.indeg(v) == 0 or g.outdeg(v) == 0}
    for v in g.vertices:
        if v not in switch and orientation_changes(g, emb, v) != 2:
            return None  # UP2 needs exactly two flat angles at a non-switch vertex

    face_slots = []  # per face: list of (angle index, vertex) switch slots
    for fi, walk in enumerate(emb.faces):
        slots = []
        k = len(walk)
        for i in range(k):
            v = walk[i]
            e1 = (walk[(i - 1) % k], v)
            e2 = (v, walk[(i + 1) % k])
            if angle_kind(g, v, e1, e2) == SWITCH:
                slots.append((i, v))
        if len(slots) % 2:
            raise OddSwitchCount(f"face {fi} has {len(slots)} switch angles")
        face_slots.append(slots)

    net = FlowNetwork()
    for v in sorted(switch):
        net.add_source(("v", v), 1)
    for fi, slots in enumerate(face_slots):
        d = len(slots) // 2 + (1 if fi == emb.outer else -1)
        if d < 0:
            return None
        net.add_sink(("f", fi), d)
    pairs = set()
    for fi, slots in enumerate(face_slots):
        for _, v in slots:
            if v in switch:
                pairs.add((v, fi))
    for v, fi in sorted(pairs):
        net.add_arc(("v", v), ("f", fi), 1)
    if net.total_supply != net.total_demand:
        return None
    value, per_arc = max_flow(net)
    if value != net.total_demand:
        return None

    # Build the assignment: flats 0, one large per saturated (v, f) arc.
    large = set()
    for (v, fi), fl in zip(sorted(pairs), per_arc):
        if fl:
            large.add((v, fi))
    values = {}
    for fi, walk in enumerate(emb.faces):
        k = len(walk)
        for i in range(k):
            v = walk[i]
            e1 = (walk[(i - 1) % k], v)
            e2 = (v, walk[(i + 1) % k])
            if angle_kind(g, v, e1, e2) == FLAT:
                values[(fi, i)] = 0
            elif (v, fi) in large:
                values[(fi, i)] = 1
                large.discard((v, fi))  # only one angle of v in f is large
            else:
                values[(fi, i)] = -1
    return AngleAssignment(values)


class OuterSplit(namedtuple("OuterSplit", "left_sides right_sides left_angles right_angles pole_angle_u pole_angle_v")):
    """The outer face of a uv-external embedding split at the poles.

    right_sides runs from u to v along the stored outer walk; left_sides is
    the complementary path, also oriented from u to v. *_angles list the
    outer-face angle slots at the interior vertices of each path, as
    (angle_index, vertex) pairs; pole_angle_* are the angle indices at the
    poles.
    """


def split_outer_face(emb, u, v):
    """Split the outer face walk at poles u and v; they must occur once each."""
    walk = emb.faces[emb.outer]
    k = len(walk)
    pu = [i for i in range(k) if walk[i] == u]
    pv = [i for i in range(k) if walk[i] == v]
    if len(pu) != 1 or len(pv) != 1:
        raise ValueError(f"poles must occur exactly once on the outer face ({u}:{len(pu)}, {v}:{len(pv)})")
    pu, pv = pu[0], pv[0]

    def path(a, b):
        out = []
        i = a
        while i != b:
            out.append((walk[i], walk[(i + 1) % k]))
            i = (i + 1) % k
        return out

    right = path(pu, pv)          # along walk order, u -> v
    left_rev = path(pv, pu)       # v -> u
    left = [(y, x) for (x, y) in reversed(left_rev)]  # re-oriented u -> v

    def interior_angles(a, b):
        out = []
        i = (a + 1) % k
        while i != b:
            out.append((i, walk[i]))
            i = (i + 1) % k
        return out

    right_angles = interior_angles(pu, pv)
    left_angles = interior_angles(pv, pu)
    left_angles = left_angles[::-1]  # u -> v order
    return OuterSplit(left, right, left_angles, right_angles, pu, pv)
