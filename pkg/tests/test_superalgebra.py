import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.errors import NonInvertibleBody
from artifact.modulispace import QGroup
from artifact.superalgebra import (
    Grassmann,
    QElement,
    abelian,
    aff1,
    build_gln,
    build_qn,
    odd_double,
    odet,
    otr,
)

g = Grassmann.generator


@st.composite
def grassmann(draw, gens=4):
    terms = draw(
        st.dictionaries(
            st.lists(st.integers(1, gens), unique=True, max_size=gens).map(lambda l: tuple(sorted(l))),
            st.fractions(max_denominator=5).filter(lambda c: c != 0),
            max_size=5,
        )
    )
    out = Grassmann()
    for idx, c in terms.items():
        out = out + Grassmann.monomial(idx, c)
    return out


def test_anticommutation_and_nilpotence():
    assert g(1) * g(2) == Grassmann.monomial((1, 2))
    assert g(2) * g(1) == -Grassmann.monomial((1, 2))
    assert (g(1) * g(1)).is_zero()
    assert (1 + g(1)) * (1 + g(2)) == 1 + g(1) + g(2) + g(1) * g(2)


@settings(max_examples=60, deadline=None)
@given(grassmann(), grassmann(), grassmann())
def test_product_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(grassmann(), grassmann())
def test_supercommutativity_of_homogeneous_parts(a, b):
    for x in (a.even_part(), a.odd_part()):
        for y in (b.even_part(), b.odd_part()):
            sign = -1 if (x.is_odd() and y.is_odd() and not x.is_zero() and not y.is_zero()) else 1
            assert x * y == y * x * sign


def test_qelement_inverse():
    assert QElement.identity(2).inverse() == QElement.identity(2)
    rng = random.Random(3)
    a, _ = QGroup(2).random_element(rng, 1)
    one = QElement.identity(2)
    assert a * a.inverse() == one
    assert a.inverse() * a == one


def test_singular_body_rejected():
    with pytest.raises(NonInvertibleBody):
        QElement(1, [[Fraction(0)]], [[g(1)]]).inverse()


def test_otr_examples():
    assert otr(QElement.xi(2)) == Grassmann.scalar(2)
    assert otr(QElement.identity(3)).is_zero()
    rng = random.Random(7)
    a, k = QGroup(2).random_element(rng, 1)
    b, _ = QGroup(2).random_element(rng, k)
    assert otr(a * b) == otr(b * a)


def test_odet_examples():
    assert odet(QElement.identity(2)).is_zero()
    a = QElement(1, [[Fraction(3)]], [[g(1)]])
    assert odet(a) == g(1) * Fraction(1, 3)
    rng = random.Random(11)
    x, k = QGroup(2).random_element(rng, 1)
    y, _ = QGroup(2).random_element(rng, k)
    assert odet(x * y) == odet(x) + odet(y)
    assert odet(x.inverse()) == -odet(x)


def test_q1_pairing():
    q = build_qn(1)
    assert q.parity == [0, 1]
    assert q.t == [[0, 1], [1, 0]]
    # t = 1⊗ξ − ξ⊗1 in the basis (1, ξ)
    assert sorted(q.t_pairs) == [(0, 1, 1), (1, 0, -1)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_qn_unimodular(n):
    assert not build_qn(n).nu_vector()


def test_double_modular_vector():
    assert not odd_double(abelian(2)).nu_vector()
    assert odd_double(aff1()).nu_vector()


def test_gl2_split_casimir():
    s = build_gln(2)
    # E_(αβ) ⊗ E_(βα) summed, in row-major unit order
    assert sorted(s.s_pairs) == [(0, 0, 1), (1, 2, 1), (2, 1, 1), (3, 3, 1)]
