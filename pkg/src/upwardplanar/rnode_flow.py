"""R-node subprocedure parameterized by the number of sources.

For every candidate shape, every combination of shapes for the extreme and
interesting components, and both skeleton flips, a bipartite flow network
decides whether the rigid composition can realize the shape: unit supplies
stand for large angles still to be placed (switch vertices, boring hats and
hearts, the positive turn excess of fixed components), sinks are the skeleton
faces with demands derived from their switch-angle counts, and the two outer
sinks pin the target turn numbers. Non-extreme boring components keep their
choice of preferred shape inside the network rather than in the enumeration.
"""

import itertools
from collections import namedtuple

from .embedding import FlowNetwork, max_flow, split_outer_face
from .errors import NegativeDemand, NotBoring
from .shapes import (
    BORING_CATALOG,
    HAT,
    HEART,
    IN,
    INVERTED_HAT,
    INVERTED_HEART,
    INVERTED_LEFT_WING,
    INVERTED_RIGHT_WING,
    LEFT_WING,
    RIGHT_WING,
    FeasibleSet,
    coherent_shapes,
    preferred_set,
)

TRACE = None

WING_PAIRS = ({LEFT_WING, RIGHT_WING}, {INVERTED_LEFT_WING, INVERTED_RIGHT_WING})
HAT_PAIR = {HAT, INVERTED_HAT}
HEARTS = {HEART, INVERTED_HEART}

ComponentClass = namedtuple("ComponentClass", "interesting extreme preferred")


def turn_range(sigma_mu):
    """Turn numbers of any pole-external embedding lie in this interval."""
    assert sigma_mu >= 0
    return (-2 * sigma_mu - 1, 2 * sigma_mu + 1)


class FlipData:
    """Per-flip geometry: side faces, outer paths, extreme slots."""

    def __init__(self, ctx, emb):
        self.emb = emb
        u, v = ctx.poles
        self.split = split_outer_face(emb, u, v)
        self.outer = emb.outer
        # side faces per skeleton slot, traversing the slot (x, y) from x to y
        self.f_r = {}
        self.f_l = {}
        for ci, (x, y) in enumerate(ctx.skeleton):
            self.f_r[ci] = emb.side_face[(x, y)]
            self.f_l[ci] = emb.side_face[(y, x)]
        self.slot_of = {frozenset(e): ci for ci, e in enumerate(ctx.skeleton)}
        # the four extreme slots: (child, pole vertex, shape field of s)
        sp = self.split
        self.extreme_slots = [
            (self.slot_of[frozenset(sp.left_sides[0])], u, "rho_lu"),
            (self.slot_of[frozenset(sp.right_sides[0])], u, "rho_ru"),
            (self.slot_of[frozenset(sp.left_sides[-1])], v, "rho_lv"),
            (self.slot_of[frozenset(sp.right_sides[-1])], v, "rho_rv"),
        ]
        self.extreme = {ci for ci, _, _ in self.extreme_slots}
        assert len(self.extreme) == 4, "an R-node skeleton has four extreme slots"
        # which outer path each slot / interior vertex lies on
        self.outer_path_of_slot = {}
        for side in sp.left_sides:
            self.outer_path_of_slot[self.slot_of[frozenset(side)]] = "l"
        for side in sp.right_sides:
            self.outer_path_of_slot[self.slot_of[frozenset(side)]] = "r"
        self.outer_path_of_vertex = {}
        for _, w in sp.left_angles:
            self.outer_path_of_vertex[w] = "l"
        for _, w in sp.right_angles:
            self.outer_path_of_vertex[w] = "r"

    def outer_side_of(self, ci):
        """'l' if the slot's left side faces the outer face, 'r' for right, else None."""
        if self.f_l[ci] == self.outer:
            return "l"
        if self.f_r[ci] == self.outer:
            return "r"
        return None

    def face_side(self, ci, fi):
        if self.f_l[ci] == fi:
            return "l"
        assert self.f_r[ci] == fi
        return "r"

    def sink_for_face(self, fi):
        return ("f", fi)


def classify_components(ctx, flip):
    """ComponentClass per child for one skeleton flip.

    interesting: contains a source besides its own poles; extreme: its slot
    is incident to a pole and to the outer face. Non-extreme boring children
    carry their preferred sets.
    """
    classes = []
    for ci, child in enumerate(ctx.children):
        x, y = ctx.skeleton[ci]
        g = child.pertinent(ctx.g_mu)
        interesting = any(s not in (x, y) for s in g.sources())
        extreme = ci in flip.extreme
        preferred = None
        if not interesting and not extreme:
            shapes = set(ctx.child_sets[ci])
            if not shapes <= BORING_CATALOG:
                raise NotBoring(
                    f"boring child {ci} has non-catalog shapes {shapes - BORING_CATALOG}")
            preferred = preferred_set(shapes)
        classes.append(ComponentClass(interesting, extreme, preferred))
    return classes


def _lam_at_vertex(shape, pole_letter):
    return shape.lam_u if pole_letter == "u" else shape.lam_v


def precheck(ctx, flip, classes, chosen, s):
    """Extreme-edge, angle and pole checks; returns availability or None.

    ``chosen`` maps child index to its fixed shape (extreme or interesting
    children only).
    """
    # extreme-edge check: boundary edge orientations must match s
    for ci, w, field in flip.extreme_slots:
        side = "l" if flip.f_l[ci] == flip.outer else "r"
        pole_letter = ctx.child_pole(ci, w)
        if chosen[ci].rho_at(pole_letter, side) != getattr(s, field):
            return None

    available = {}
    for w in ctx.skel_vertices:
        if not ctx.is_switch_mu(w):
            continue
        l_w = 0
        for ci in _children_at(ctx, w):
            pole_letter = ctx.child_pole(ci, w)
            if ci in chosen:
                if _lam_at_vertex(chosen[ci], pole_letter) == -1:
                    l_w += 1
            else:
                pref = classes[ci].preferred
                if pref == {HEART} and pole_letter == "v":
                    l_w += 1
                elif pref == {INVERTED_HEART} and pole_letter == "u":
                    l_w += 1
        if l_w > 1:
            return None
        available[w] = l_w == 0

    for w in ctx.skel_vertices:
        if ctx.is_switch_mu(w):
            continue
        sp = ctx.special_child_at(w)
        for ci in _children_at(ctx, w):
            if ci == sp:
                continue
            pole_letter = ctx.child_pole(ci, w)
            if ci in chosen:
                if _lam_at_vertex(chosen[ci], pole_letter) != 1:
                    return None
            else:
                pref = classes[ci].preferred
                if pref == {HEART} and pole_letter == "v":
                    return None
                if pref == {INVERTED_HEART} and pole_letter == "u":
                    return None

    u, v = ctx.poles
    for pole, lam in ((u, s.lam_u), (v, s.lam_v)):
        if lam == 1 and not available.get(pole, False):
            return None
    return available


def _children_at(ctx, w):
    return [ci for ci, (x, y) in enumerate(ctx.skeleton) if w in (x, y)]


def _turn_on_side(shape, ci, side_letter, ctx, w_orientation=None):
    return shape.tau_l if side_letter == "l" else shape.tau_r


def _count_nonswitch(ctx, flip, classes, chosen, w, slots_at_w):
    """Does the non-switch vertex w contribute a switch angle between these slots?

    slots_at_w is the pair of face-boundary slots at w; comparison is by the
    boundary-edge orientations at w: both normal counts, a special component
    counts iff its boundary edge on this side runs in the normal direction.
    Wing-pair specials count iff w's special edge is outgoing (then the flow
    carries the flat side's compensation unit).
    """
    sp = ctx.special_child_at(w)
    d = ctx.normal_dir(w)
    if sp != slots_at_w[0][0] and sp != slots_at_w[1][0]:
        return 1
    for (ci, side_letter) in slots_at_w:
        if ci != sp:
            continue
        pole_letter = ctx.child_pole(ci, w)
        if ci in chosen:
            r = chosen[ci].rho_at(pole_letter, side_letter)
            return 1 if r == d else 0
        pref = classes[ci].preferred
        values = {m.rho_at(pole_letter, side_letter) for m in pref}
        if len(values) == 1:
            return 1 if values.pop() == d else 0
        # wing pair at its mixed pole: fixed convention, compensated by flow
        return 1 if d == IN else 0
    raise AssertionError


def build_network(ctx, flip, classes, chosen, s, available):
    """The flow network for one (shape, combination, flip) configuration.

    Returns (net, info) or raises NegativeDemand; info maps sink labels to
    demands for tracing and tests.
    """
    u, v = ctx.poles
    emb = flip.emb
    net = FlowNetwork()
    info = {}

    heart_pair_children = [
        ci for ci, cl in enumerate(classes)
        if cl.preferred is not None and cl.preferred == HEARTS]

    # ----- sinks -----
    def slot_pairs_of_face(fi):
        walk = emb.faces[fi]
        k = len(walk)
        return [((walk[i], walk[(i + 1) % k])) for i in range(k)]

    def face_count(fi):
        walk = emb.faces[fi]
        k = len(walk)
        n = 0
        for i in range(k):
            side = (walk[i], walk[(i + 1) % k])
            ci = flip.slot_of[frozenset(side)]
            side_letter = flip.face_side(ci, fi)
            if ci in chosen:
                n += abs(_turn_on_side(chosen[ci], ci, side_letter, ctx))
            else:
                pref = classes[ci].preferred
                if pref == HAT_PAIR or pref & HEARTS:
                    n += 1
        for i in range(k):
            w = walk[i]
            prev_side = (walk[(i - 1) % k], w)
            next_side = (w, walk[(i + 1) % k])
            if ctx.is_switch_mu(w):
                n += 1
            else:
                ci_a = flip.slot_of[frozenset(prev_side)]
                ci_b = flip.slot_of[frozenset(next_side)]
                pair = ((ci_a, flip.face_side(ci_a, fi)), (ci_b, flip.face_side(ci_b, fi)))
                n += _count_nonswitch(ctx, flip, classes, chosen, w, pair)
        return n

    for fi in range(len(emb.faces)):
        if fi == flip.outer:
            continue
        n_f = face_count(fi)
        if n_f % 2:
            raise NegativeDemand(f"odd n_f={n_f} at face {fi}")
        d = n_f // 2 - 1
        if d < 0:
            raise NegativeDemand(f"face {fi} demand {d}")
        net.add_sink(("f", fi), d)
        info[("f", fi)] = d

    def path_count(sides, angles):
        n = 0
        for side in sides:
            ci = flip.slot_of[frozenset(side)]
            side_letter = "l" if flip.f_l[ci] == flip.outer else "r"
            if ci in chosen:
                n += abs(_turn_on_side(chosen[ci], ci, side_letter, ctx))
            else:
                pref = classes[ci].preferred
                if pref == HAT_PAIR or pref & HEARTS:
                    n += 1
        for idx, w in angles:
            if ctx.is_switch_mu(w):
                n += 1
            else:
                walk = emb.faces[flip.outer]
                k = len(walk)
                prev_side = (walk[(idx - 1) % k], w)
                next_side = (w, walk[(idx + 1) % k])
                ci_a = flip.slot_of[frozenset(prev_side)]
                ci_b = flip.slot_of[frozenset(next_side)]
                pair = ((ci_a, "l" if flip.f_l[ci_a] == flip.outer else "r"),
                        (ci_b, "l" if flip.f_l[ci_b] == flip.outer else "r"))
                n += _count_nonswitch(ctx, flip, classes, chosen, w, pair)
        return n

    n_l = path_count(flip.split.left_sides, flip.split.left_angles)
    n_r = path_count(flip.split.right_sides, flip.split.right_angles)
    for label, tau, n_path in (("tl", s.tau_l, n_l), ("tr", s.tau_r, n_r)):
        if (tau + n_path) % 2:
            raise NegativeDemand(f"{label} parity: tau={tau} n={n_path}")
        d = (tau + n_path) // 2
        if d < 0:
            raise NegativeDemand(f"{label} demand {d}")
        net.add_sink(label, d)
        info[label] = d

    for ci in heart_pair_children:
        net.add_sink(("heart", ci), 1)
        info[("heart", ci)] = 1
    if s.lam_u == 1:
        net.add_sink("tu", 1)
        info["tu"] = 1
    if s.lam_v == 1:
        net.add_sink("tv", 1)
        info["tv"] = 1

    # ----- sources and arcs -----
    def outer_sink_for_vertex(w):
        return "tl" if flip.outer_path_of_vertex[w] == "l" else "tr"

    def sink_of(fi, ci):
        if fi == flip.outer:
            return "tl" if flip.outer_path_of_slot[ci] == "l" else "tr"
        return ("f", fi)

    faces_at = {w: [] for w in ctx.skel_vertices}
    for fi, walk in enumerate(emb.faces):
        for w in set(walk):
            faces_at[w].append(fi)

    for w in ctx.skel_vertices:
        if not available.get(w, False):
            continue
        net.add_source(("v", w), 1)
        if w == u or w == v:
            lam = s.lam_u if w == u else s.lam_v
            if lam == 1:
                net.add_arc(("v", w), "tu" if w == u else "tv", 1)
            else:
                assert lam == -1
                for fi in faces_at[w]:
                    if fi != flip.outer:
                        net.add_arc(("v", w), ("f", fi), 1)
                for ci in heart_pair_children:
                    if w in ctx.skeleton[ci]:
                        net.add_arc(("v", w), ("heart", ci), 1)
        else:
            for fi in faces_at[w]:
                if fi == flip.outer:
                    net.add_arc(("v", w), outer_sink_for_vertex(w), 1)
                else:
                    net.add_arc(("v", w), ("f", fi), 1)
            for ci in heart_pair_children:
                if w in ctx.skeleton[ci]:
                    net.add_arc(("v", w), ("heart", ci), 1)

    # non-switch wing sources
    for w in ctx.skel_vertices:
        if ctx.is_switch_mu(w):
            continue
        sp = ctx.special_child_at(w)
        if sp is None or classes[sp].preferred not in WING_PAIRS:
            continue
        pole_letter = ctx.child_pole(sp, w)
        mixed = {m.lam_at(pole_letter) for m in classes[sp].preferred} == {0}
        if not mixed:
            continue
        if ctx.normal_dir(w) != IN:  # special edge must be outgoing w
            continue
        net.add_source(("w", w), 1)
        net.add_arc(("w", w), sink_of(flip.f_l[sp], sp), 1)
        net.add_arc(("w", w), sink_of(flip.f_r[sp], sp), 1)

    # turn-excess sources of fixed components
    for ci, shape in sorted(chosen.items()):
        if shape.tau_l > 0:
            net.add_source(("zl", ci), shape.tau_l)
            net.add_arc(("zl", ci), sink_of(flip.f_l[ci], ci), shape.tau_l)
        if shape.tau_r > 0:
            net.add_source(("zr", ci), shape.tau_r)
            net.add_arc(("zr", ci), sink_of(flip.f_r[ci], ci), shape.tau_r)

    # boring hats and hearts
    for ci, cl in enumerate(classes):
        if cl.preferred is None:
            continue
        if cl.preferred == HAT_PAIR:
            net.add_source(("b", ci), 1)
            net.add_arc(("b", ci), sink_of(flip.f_l[ci], ci), 1)
            net.add_arc(("b", ci), sink_of(flip.f_r[ci], ci), 1)
        elif cl.preferred & HEARTS:
            net.add_source(("b1", ci), 1)
            net.add_arc(("b1", ci), sink_of(flip.f_l[ci], ci), 1)
            net.add_source(("b2", ci), 1)
            net.add_arc(("b2", ci), sink_of(flip.f_r[ci], ci), 1)

    return net, info


def accepts(ctx, flip, classes, chosen, s):
    available = precheck(ctx, flip, classes, chosen, s)
    if available is None:
        return False
    try:
        net, _ = build_network(ctx, flip, classes, chosen, s, available)
    except NegativeDemand:
        return False
    if net.total_supply != net.total_demand:
        return False
    value, _ = max_flow(net)
    if value != net.total_demand:
        return False
    if TRACE is not None:
        demands = " ".join(f"{k}={d}" for k, d in sorted(net.demands.items(), key=str))
        TRACE.write(f"flow accept {s}: {demands}\n")
    return True


def candidate_shapes(ctx):
    lo, hi = turn_range(ctx.sigma_mu)
    lo = max(lo, ctx.tau_min)
    hi = min(hi, ctx.tau_max)
    out = []
    for tau_l in range(lo, hi + 1):
        for s in coherent_shapes(tau_l):
            if lo <= s.tau_r <= hi:
                out.append(s)
    return out


_MEMO = {}


def r_node_sources(ctx):
    """The source-count R-node subprocedure."""
    key = ctx.memo_key()
    if key in _MEMO:
        return _MEMO[key].copy()
    if len(_MEMO) > 20000:
        _MEMO.clear()
    out = FeasibleSet(ctx.tau_min, ctx.tau_max)
    remaining = set(candidate_shapes(ctx))
    for emb in ctx.flips:
        if not remaining:
            break
        flip = FlipData(ctx, emb)
        classes = classify_components(ctx, flip)
        fixed = [ci for ci, cl in enumerate(classes) if cl.extreme or cl.interesting]
        combos = list(itertools.product(*[list(ctx.child_sets[ci]) for ci in fixed]))
        for s in sorted(remaining, key=str):
            for combo in combos:
                if accepts(ctx, flip, classes, dict(zip(fixed, combo)), s):
                    out.insert(s)
                    break
        remaining -= set(out.shapes())
    _MEMO[key] = out.copy()
    return out
