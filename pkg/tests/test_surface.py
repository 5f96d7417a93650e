import pytest

from artifact.errors import IllegalSlide, MalformedSkeleton, NonComposablePath, SameVertex, UnknownEdge
from artifact.surface import (
    Edge,
    Skeleton,
    builtin,
    fuse,
    invert_word,
    reduce_word,
    reverse_edge,
    slide,
    slide_options,
)


def test_torus_and_pants_topology():
    t = builtin("torus").validate()
    assert (t.genus, t.boundary_components) == (1, 1)
    p = builtin("pants").validate()
    assert (p.genus, p.boundary_components) == (0, 3)
    g = builtin("genus2").validate()
    assert (g.genus, g.boundary_components) == (2, 1)


def test_missing_half_edges_rejected():
    with pytest.raises(MalformedSkeleton):
        Skeleton([("v", [])], [Edge("a", "a+", "a-")])


def test_disconnected_rejected():
    with pytest.raises(MalformedSkeleton):
        Skeleton([("v", ["a+", "a-"]), ("w", ["b+", "b-"])], [Edge("a", "a+", "a-"), Edge("b", "b+", "b-")])


def test_reverse_negates_rotation_and_is_involutive():
    sk = builtin("torus").with_rotations({"a": 3})
    r, mv = reverse_edge(sk, "a")
    assert r.rot2("a") == -3
    assert mv.transport((("a", 1),)) == (("a", -1),)
    rr, _ = reverse_edge(r, "a")
    assert rr == sk
    with pytest.raises(UnknownEdge):
        reverse_edge(sk, "z")


def test_slide_substitution_is_invertible():
    sk = builtin("torus")
    for opt in slide_options(sk):
        new, mv = slide(sk, *opt)
        assert new.validate() == sk.validate()
        for e in sk.edge_ids():
            w = ((e, 1),)
            assert reduce_word(mv.pullback(mv.transport(w))) == w
            # inverses go to inverse words
            assert mv.transport(invert_word(w)) == invert_word(mv.transport(w))


def test_illegal_slide():
    with pytest.raises(IllegalSlide):
        slide(builtin("genus2"), "d-", "a", "tail")


def test_fuse_concatenates_orders():
    an = builtin("annulus2")
    f = fuse(an, "p", None, "q")
    assert f.half_edges_at("p") == ("e+", "f+", "f-", "e-")
    assert f.rot2("e") == an.rot2("e")
    with pytest.raises(SameVertex):
        fuse(an, "p", None, "p")


def test_fuse_disjoint_pieces():
    a = Skeleton([("u", ["a+", "a-"])], [Edge("a", "a+", "a-")])
    b = Skeleton([("w", ["b+", "b-"])], [Edge("b", "b+", "b-")])
    f = fuse(a, "u", b, "w")
    assert len(f.half_edges_at("u")) == 4
    assert f.validate().boundary_components == 3


def test_path_rotation():
    sk = builtin("torus").with_rotations({"a": 3, "b": -1})
    assert sk.path_rotation((("a", 1),)) == sk.rot2("a") / 2
    w = (("b", 1), ("a", 1))
    assert sk.path_rotation(w) == -sk.path_rotation(invert_word(w))
    # passing the vertex adds a half turn on top of the edge rotations
    assert abs(sk.path_rotation(w) - 1) == 0.5
    with pytest.raises(NonComposablePath):
        builtin("annulus2").path_rotation((("e", 1), ("e", 1)))


def test_json_round_trip():
    sk = builtin("genus2").with_rotations({"c": 5})
    assert Skeleton.from_json(sk.to_json()) == sk
