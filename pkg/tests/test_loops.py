import random

import pytest

from artifact.errors import NonClosedWord, ParseError, ProperPowerUnsupported
from artifact.harness import random_loop
from artifact.loops import (
    CIRCLE,
    HBasis,
    bv_delta_wedge,
    canonicalize,
    crossings,
    extended_bracket,
    goldman_bracket,
    h1_edges,
    intersection_matrix,
    parse_word,
    realize,
    single,
    turaev_cobracket,
    wedge_sum,
)
from artifact.surface import builtin, slide

T = builtin("torus")


def c(text, sk=T):
    return canonicalize(text, sk)


def test_parse_word_grammar():
    assert parse_word("a b a' b'", T) == (("a", 1), ("b", 1), ("a", -1), ("b", -1))
    assert parse_word("a.b^-1", T) == (("a", 1), ("b", -1))
    assert c("a a^-1") == CIRCLE
    with pytest.raises(ParseError):
        parse_word("a c", T)


def test_non_closed_word():
    an = builtin("annulus2")
    with pytest.raises(NonClosedWord):
        canonicalize("e", an)


def test_canonical_form_is_conjugation_invariant():
    assert c("a b") == c("b a")
    assert c("b' a b") == c("a")
    assert c("a b a' b'") != c("b a b' a'")


def test_bracket_of_generators():
    ab = goldman_bracket(T, c("a"), c("b"))
    assert len(ab) == 1 and abs(list(ab.values())[0]) == 1
    assert list(ab)[0] == c("a b")
    assert goldman_bracket(T, c("b"), c("a")) == ab.scale(-1)
    assert goldman_bracket(T, c("a"), c("a")).is_zero()


def test_boundary_loop_is_central():
    rng = random.Random(5)
    for _ in range(10):
        x = random_loop(T, rng, 5)
        assert goldman_bracket(T, c("a b a' b'"), x).is_zero()


def test_simple_loops_have_zero_cobracket():
    for w in ("a", "b", "a b", "a b a' b'"):
        assert turaev_cobracket(T, c(w)).is_zero()
    assert not turaev_cobracket(T, c("a a b a' b' b'")).is_zero()


def test_proper_powers_rejected():
    with pytest.raises(ProperPowerUnsupported):
        realize(T, [c("a a")], 0)


def test_wedge_square_vanishes():
    a = single(c("a"))
    assert wedge_sum(a, a).is_zero()
    assert wedge_sum(single(c("b")), a) == wedge_sum(a, single(c("b"))).scale(-1)


def test_intersection_form_and_extension():
    assert h1_edges(T) == ["a", "b"]
    m = intersection_matrix(T)
    assert m[0][1] == -m[1][0] and abs(m[0][1]) == 1
    assert extended_bracket(T, single(HBasis(0)), single(HBasis(1))) == single(CIRCLE, m[0][1])
    assert extended_bracket(T, single(c("a")), single(HBasis(1))) == single(c("a"), m[0][1])


def test_bracket_independent_of_realization_and_skeleton():
    rng = random.Random(2)
    new, mv = slide(T, "b+", "a", "tail")
    for _ in range(5):
        x, y = random_loop(T, rng, 4), random_loop(T, rng, 4)
        base = goldman_bracket(T, x, y)
        for s in range(1, 9):
            assert goldman_bracket(T, x, y, seed=s) == base
        moved = goldman_bracket(new, canonicalize(mv.transport(x.letters), new), canonicalize(mv.transport(y.letters), new))
        assert moved == {canonicalize(mv.transport(k.letters), new): v for k, v in base.items()}


def test_bv_delta_squares_to_zero():
    rng = random.Random(9)
    for _ in range(5):
        W = wedge_sum(*[single(random_loop(T, rng, 4)) for _ in range(3)])
        assert bv_delta_wedge(T, bv_delta_wedge(T, W, 2), 2).is_zero()


def test_crossing_count_of_generators():
    d = realize(T, [c("a"), c("b")], 0)
    inter = [x for x in crossings(d) if x.first.item != x.second.item]
    assert sum(x.sign for x in inter) in (1, -1)
