import random

import pytest

from artifact.errors import LogdetNotEvaluable, ParseError
from artifact.harness import _entry_function, random_loop
from artifact.modulispace import (
    ChordAtom,
    DoubleGroup,
    GLGroup,
    Inv,
    QGroup,
    evaluate,
    fock_rosly_bracket,
    function,
    identity_point,
    parse_function,
    quasi_bv_delta,
    random_point,
)
from artifact.superalgebra import Grassmann
from artifact.surface import builtin, reverse_edge, slide

T = builtin("torus")


def test_holonomy_multiplies_along_the_word():
    pt = random_point(T, QGroup(2), 4)
    w = (("a", 1), ("b", -1))
    assert pt.holonomy(w) == pt.element(("a", 1)) * pt.element(("b", -1))
    assert pt.holonomy((("b", 1), ("b", -1))) == QGroup(2).identity()


def test_identity_point_traces():
    pt = identity_point(T, GLGroup(3))
    assert function(Inv("tr", (("a", 1),)))(pt) == Grassmann.scalar(3)


def test_reversal_transports_holonomy():
    pt = random_point(T, DoubleGroup(), 1)
    new, mv = reverse_edge(T, "a")
    moved = pt.transport(mv)
    assert moved.element(("a", 1)) == pt.element(("a", -1))


def test_functions_transport_along_moves():
    rng = random.Random(0)
    pt = random_point(T, QGroup(1), 0)
    _, mv = slide(T, "b+", "a", "tail")
    for _ in range(5):
        f = _entry_function(T, rng, QGroup(1), 2, 3)
        assert evaluate(f.transported(mv), pt.transport(mv)) == evaluate(f, pt)


def test_logdet_is_only_differentiated():
    pt = random_point(T, GLGroup(2), 0)
    with pytest.raises(LogdetNotEvaluable):
        function(Inv("logdet", (("a", 1),)))(pt)


def test_delta_of_constant_vanishes():
    for group in (QGroup(1), QGroup(2), DoubleGroup()):
        sk = T.with_rotations({"a": 3, "b": -1})
        assert quasi_bv_delta(function(), random_point(sk, group, 2)).is_zero()


def test_fock_rosly_antisymmetric():
    rng = random.Random(6)
    pt = random_point(T, GLGroup(2), 6)
    for _ in range(4):
        x, y = random_loop(T, rng, 4), random_loop(T, rng, 4)
        f, g = function(Inv("tr", x.letters)), function(Inv("tr", y.letters))
        assert fock_rosly_bracket(f, g, pt) == -fock_rosly_bracket(g, f, pt)


def test_parse_function_with_chord():
    f = parse_function("otr(a b) * chord(1@1 -> 2@0 via a) * odet(b)", T)
    (chord,) = f.atoms
    assert isinstance(chord, ChordAtom) and len(chord.paths) == 2
    pt = random_point(T, QGroup(1), 0)
    flipped = function(chord.reversed())
    assert flipped(pt) == -f(pt)
    assert function(chord.reversed().reversed())(pt) == f(pt)
    with pytest.raises(ParseError):
        parse_function("otr(a) + otr(b)", T)
    with pytest.raises(ParseError):
        parse_function("chord(1@0 -> 3@0)", T)


def test_point_serialization_is_deterministic():
    a = random_point(T, QGroup(2), 5).to_json()
    b = random_point(T, QGroup(2), 5).to_json()
    assert a == b and a["group"] == "Q(2)"
