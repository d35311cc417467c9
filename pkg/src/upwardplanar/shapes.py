"""Shape descriptions and feasible sets.

A shape description summarizes the outer boundary of a pole-external upward
planar embedding of a split component: the left/right turn numbers, the two
pole angle labels, and the orientations of the four boundary edges at the
poles. Only four of the eight values are independent; the dependency rules
live in :func:`is_coherent` and :func:`decode`.
"""

from collections import namedtuple

from .errors import NotBoring, TurnOutOfRange

IN = "in"
OUT = "out"


class ShapeDescription(namedtuple(
        "ShapeDescription", "tau_l tau_r lam_u lam_v rho_lu rho_ru rho_lv rho_rv")):

    __slots__ = ()

    def __str__(self):
        return "<%d,%d,%d,%d,%s,%s,%s,%s>" % self

    def reverse(self):
        """The same embedding read with the pole order swapped."""
        return ShapeDescription(self.tau_r, self.tau_l, self.lam_v, self.lam_u,
                                self.rho_rv, self.rho_lv, self.rho_ru, self.rho_lu)

    def flip(self):
        """The mirror-image embedding's shape (left and right swapped)."""
        return ShapeDescription(self.tau_r, self.tau_l, self.lam_u, self.lam_v,
                                self.rho_ru, self.rho_lu, self.rho_rv, self.rho_lv)

    def rho_at(self, pole, side):
        """Boundary-edge orientation: pole in {'u','v'}, side in {'l','r'}."""
        return getattr(self, f"rho_{side}{pole}")

    def lam_at(self, pole):
        return self.lam_u if pole == "u" else self.lam_v


def shape(tl, tr, lu, lv, rlu, rru, rlv, rrv):
    return ShapeDescription(tl, tr, lu, lv, rlu, rru, rlv, rrv)


def parse_shape(text):
    """Parse the textual syntax ``<tl,tr,lu,lv,rlu,rru,rlv,rrv>``."""
    body = text.strip().lstrip("<").rstrip(">")
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != 8:
        raise ValueError(f"bad shape syntax: {text!r}")
    nums = [int(p) for p in parts[:4]]
    rhos = []
    for p in parts[4:]:
        if p not in (IN, OUT):
            raise ValueError(f"bad rho token {p!r} in {text!r}")
        rhos.append(p)
    return ShapeDescription(*nums, *rhos)


def is_coherent(s):
    """All four dependency rules of a shape description.

    1. rho_lu == rho_ru iff lam_u is nonzero (same at v);
    2. rho_lu == rho_lv iff tau_l is odd;
    3. tau_l + tau_r + lam_u + lam_v == 2;
    4. the turn-number gap h = tau_l + tau_r lies in {0,..,4} (implied by 3).
    """
    s = ShapeDescription(*s)
    if s.lam_u not in (-1, 0, 1) or s.lam_v not in (-1, 0, 1):
        return False
    if (s.rho_lu == s.rho_ru) != (s.lam_u != 0):
        return False
    if (s.rho_lv == s.rho_rv) != (s.lam_v != 0):
        return False
    if (s.rho_lu == s.rho_lv) != (s.tau_l % 2 == 1):
        return False
    if s.tau_l + s.tau_r + s.lam_u + s.lam_v != 2:
        return False
    return True


def decode(tau_l, h, lam_u, rho_lu):
    """Reconstruct the full tuple from matrix coordinates and the stored pair."""
    tau_r = -tau_l + h
    lam_v = 2 - tau_l - tau_r - lam_u
    rho_ru = rho_lu if lam_u != 0 else _flip(rho_lu)
    rho_lv = rho_lu if tau_l % 2 == 1 else _flip(rho_lu)
    rho_rv = rho_lv if lam_v != 0 else _flip(rho_lv)
    return ShapeDescription(tau_l, tau_r, lam_u, lam_v, rho_lu, rho_ru, rho_lv, rho_rv)


def _flip(rho):
    return OUT if rho == IN else IN


def coherent_shapes(tau_l):
    """All coherent shapes with the given left-turn-number (at most 18)."""
    out = []
    for h in range(5):
        for lam_u in (-1, 0, 1):
            lam_v = 2 - h - lam_u
            if lam_v not in (-1, 0, 1):
                continue
            for rho_lu in (OUT, IN):
                out.append(decode(tau_l, h, lam_u, rho_lu))
    return out


class FeasibleSet:
    """The (tau_max - tau_min + 1) x 5 matrix of compressed shape descriptions.

    Cell [i][j] holds shapes with tau_l = tau_min + i and tau_r = -tau_l + j,
    each stored as the pair (lam_u, rho_lu); the remaining values are implied.
    """

    def __init__(self, tau_min, tau_max):
        assert tau_min <= tau_max
        self.tau_min = tau_min
        self.tau_max = tau_max
        self.cells = {}

    def _key(self, s):
        if not (self.tau_min <= s.tau_l <= self.tau_max):
            raise TurnOutOfRange(s.tau_l, self.tau_min, self.tau_max)
        h = s.tau_l + s.tau_r
        if not 0 <= h <= 4:
            raise TurnOutOfRange(s.tau_r, -s.tau_l, -s.tau_l + 4)
        return (s.tau_l - self.tau_min, h)

    def insert(self, s):
        s = ShapeDescription(*s)
        assert is_coherent(s), f"incoherent shape {s}"
        key = self._key(s)
        cell = self.cells.setdefault(key, set())
        cell.add((s.lam_u, s.rho_lu))
        assert len(cell) <= 6

    def insert_clamped(self, s):
        """Insert, silently dropping shapes whose turn numbers fall outside range."""
        if not (self.tau_min <= s.tau_l <= self.tau_max):
            return False
        if not (self.tau_min <= s.tau_r <= self.tau_max):
            return False
        self.insert(s)
        return True

    def contains(self, s):
        s = ShapeDescription(*s)
        try:
            key = self._key(s)
        except TurnOutOfRange:
            return False
        return (s.lam_u, s.rho_lu) in self.cells.get(key, ())

    __contains__ = contains

    def __iter__(self):
        for (i, h) in sorted(self.cells):
            for lam_u, rho_lu in sorted(self.cells[(i, h)], key=str):
                yield decode(self.tau_min + i, h, lam_u, rho_lu)

    def shapes(self):
        return list(self)

    def __len__(self):
        return sum(len(c) for c in self.cells.values())

    def __bool__(self):
        return bool(self.cells)

    def __eq__(self, other):
        if isinstance(other, FeasibleSet):
            return set(self) == set(other)
        return NotImplemented

    def shapes_with_tau_l(self, c):
        if not (self.tau_min <= c <= self.tau_max):
            return []
        out = []
        for h in range(5):
            for lam_u, rho_lu in sorted(self.cells.get((c - self.tau_min, h), ()), key=str):
                out.append(decode(c, h, lam_u, rho_lu))
        return out

    def shapes_with_tau_r(self, c):
        out = []
        for tau_l in range(max(self.tau_min, -c), min(self.tau_max, -c + 4) + 1):
            h = tau_l + c
            if 0 <= h <= 4:
                for lam_u, rho_lu in sorted(self.cells.get((tau_l - self.tau_min, h), ()), key=str):
                    out.append(decode(tau_l, h, lam_u, rho_lu))
        return out

    def copy(self):
        out = FeasibleSet(self.tau_min, self.tau_max)
        for key, cell in self.cells.items():
            out.cells[key] = set(cell)
        return out

    def __repr__(self):
        return "{" + ", ".join(str(s) for s in self) + "}"


def feasible_from(shapes_iter, tau_min, tau_max):
    fs = FeasibleSet(tau_min, tau_max)
    for s in shapes_iter:
        fs.insert(s)
    return fs


# The ten shapes a component with no internal sources can realize. Names
# follow the sausage/wing/hat/heart scheme; inverted_* is the pole reversal.
# (The inverted left wing is the reversal of the left wing; the catalog is
# closed under reversal and every entry is coherent.)
SAUSAGE = shape(0, 0, 1, 1, OUT, OUT, IN, IN)
INVERTED_SAUSAGE = shape(0, 0, 1, 1, IN, IN, OUT, OUT)
RIGHT_WING = shape(0, 1, 1, 0, OUT, OUT, IN, OUT)
INVERTED_RIGHT_WING = shape(1, 0, 0, 1, OUT, IN, OUT, OUT)
LEFT_WING = shape(1, 0, 1, 0, OUT, OUT, OUT, IN)
INVERTED_LEFT_WING = shape(0, 1, 0, 1, IN, OUT, OUT, OUT)
HAT = shape(-1, 1, 1, 1, OUT, OUT, OUT, OUT)
INVERTED_HAT = shape(1, -1, 1, 1, OUT, OUT, OUT, OUT)
HEART = shape(1, 1, 1, -1, OUT, OUT, OUT, OUT)
INVERTED_HEART = shape(1, 1, -1, 1, OUT, OUT, OUT, OUT)

BORING_SHAPES = {
    "sausage": SAUSAGE,
    "inverted_sausage": INVERTED_SAUSAGE,
    "right_wing": RIGHT_WING,
    "inverted_right_wing": INVERTED_RIGHT_WING,
    "left_wing": LEFT_WING,
    "inverted_left_wing": INVERTED_LEFT_WING,
    "hat": HAT,
    "inverted_hat": INVERTED_HAT,
    "heart": HEART,
    "inverted_heart": INVERTED_HEART,
}

BORING_CATALOG = frozenset(BORING_SHAPES.values())


def is_thin(s):
    """Thin shapes can repeat in parallel compositions."""
    s = ShapeDescription(*s)
    return (s.tau_r == -s.tau_l and s.lam_u == 1 and s.lam_v == 1
            and s.rho_lu == s.rho_ru and s.rho_lv == s.rho_rv)


def preferred_set(shapes):
    """Restrict a boring component's feasible set to its preferred shapes.

    Sausages stand alone; a wing implies the opposite wing; a hat implies the
    inverted hat; heart-only sets stay as they are.
    """
    shapes = set(shapes)
    if not shapes <= BORING_CATALOG:
        raise NotBoring(f"shapes outside the boring catalog: {shapes - BORING_CATALOG}")
    if SAUSAGE in shapes or INVERTED_SAUSAGE in shapes:
        return set(shapes)
    if LEFT_WING in shapes or RIGHT_WING in shapes:
        return {LEFT_WING, RIGHT_WING}
    if INVERTED_LEFT_WING in shapes or INVERTED_RIGHT_WING in shapes:
        return {INVERTED_LEFT_WING, INVERTED_RIGHT_WING}
    if HAT in shapes or INVERTED_HAT in shapes:
        return {HAT, INVERTED_HAT}
    return set(shapes)  # hearts only
