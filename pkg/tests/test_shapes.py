import pytest

from upwardplanar.errors import NotBoring, TurnOutOfRange
from upwardplanar.shapes import (
    BORING_CATALOG,
    BORING_SHAPES,
    HAT,
    HEART,
    IN,
    INVERTED_HEART,
    INVERTED_LEFT_WING,
    INVERTED_RIGHT_WING,
    LEFT_WING,
    OUT,
    RIGHT_WING,
    SAUSAGE,
    FeasibleSet,
    ShapeDescription,
    coherent_shapes,
    decode,
    is_coherent,
    is_thin,
    parse_shape,
    preferred_set,
    shape,
)


def test_coherent_examples():
    assert is_coherent(parse_shape("<0,0,1,1,out,out,in,in>"))
    assert is_coherent(parse_shape("<3,0,0,-1,out,in,out,out>"))
    assert not is_coherent(shape(0, 0, 1, 0, OUT, OUT, IN, OUT))  # sum = 1


def test_catalog_coherent_and_reversals():
    for name, s in BORING_SHAPES.items():
        assert is_coherent(s), name
    for plain, inv in [("sausage", "inverted_sausage"),
                       ("right_wing", "inverted_right_wing"),
                       ("left_wing", "inverted_left_wing"),
                       ("hat", "inverted_hat"),
                       ("heart", "inverted_heart")]:
        assert BORING_SHAPES[plain].reverse() == BORING_SHAPES[inv]
        assert BORING_SHAPES[inv].reverse() == BORING_SHAPES[plain]


def test_decode_encode_identity():
    for tau_l in range(-6, 7):
        for s in coherent_shapes(tau_l):
            assert is_coherent(s)
            h = s.tau_l + s.tau_r
            assert decode(s.tau_l, h, s.lam_u, s.rho_lu) == s


def test_at_most_18_per_turn_number():
    for tau_l in range(-4, 5):
        assert len(coherent_shapes(tau_l)) <= 18


def test_feasible_set_ops():
    fs = FeasibleSet(-3, 3)
    fs.insert(SAUSAGE)
    fs.insert(SAUSAGE)
    assert len(fs) == 1
    assert SAUSAGE in fs
    assert HEART not in fs
    fs.insert(HEART)
    assert set(fs) == {SAUSAGE, HEART}
    assert len(fs.shapes_with_tau_l(0)) <= 18
    assert fs.shapes_with_tau_l(1) == [HEART]
    assert fs.shapes_with_tau_r(0) == [SAUSAGE]


def test_turn_out_of_range():
    fs = FeasibleSet(-2, 2)
    with pytest.raises(TurnOutOfRange):
        fs.insert(shape(-3, 3, 1, 1, OUT, OUT, OUT, OUT))
    assert not fs.insert_clamped(shape(-3, 3, 1, 1, OUT, OUT, OUT, OUT))


def test_cell_budget():
    fs = FeasibleSet(-8, 8)
    for tau_l in range(-8, 9):
        for s in coherent_shapes(tau_l):
            if -8 <= s.tau_r <= 8:
                fs.insert(s)
    for cell in fs.cells.values():
        assert len(cell) <= 6


def test_thin():
    assert is_thin(SAUSAGE)
    assert is_thin(HAT)
    assert not is_thin(HEART)  # lam_v is -1
    assert not is_thin(RIGHT_WING)


def test_preferred_sets():
    assert preferred_set({SAUSAGE}) == {SAUSAGE}
    assert preferred_set({LEFT_WING, RIGHT_WING, HEART}) == {LEFT_WING, RIGHT_WING}
    assert preferred_set({INVERTED_LEFT_WING}) == {INVERTED_LEFT_WING, INVERTED_RIGHT_WING}
    assert preferred_set({HAT}) == {HAT, BORING_SHAPES["inverted_hat"]}
    assert preferred_set({HEART, INVERTED_HEART}) == {HEART, INVERTED_HEART}
    with pytest.raises(NotBoring):
        preferred_set({shape(2, 0, 1, -1, OUT, OUT, OUT, OUT)})


def test_shape_text_roundtrip():
    for s in BORING_CATALOG:
        assert parse_shape(str(s)) == s


def test_flip_is_involution():
    for tau_l in range(-3, 4):
        for s in coherent_shapes(tau_l):
            assert s.flip().flip() == s
            assert s.reverse().reverse() == s
            assert is_coherent(s.flip())
            assert is_coherent(s.reverse())
