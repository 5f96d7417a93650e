"""Ribbon-graph skeletons of surfaces with boundary.

A skeleton is a graph whose vertices sit at marked points on the boundary.
Half-edges at a vertex are linearly ordered counter-clockwise, starting just
after the marked point.  Each edge carries twice its rotation number.

Words in edges use product notation: the word ``(l0, l1, ..., lk)`` has
holonomy ``g_l0 g_l1 ... g_lk`` and is traversed from the right, so ``lk``
is walked first.  A letter is a pair ``(edge_id, ±1)``; ``+1`` walks the
edge from its tail to its head.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    IllegalSlide,
    MalformedSkeleton,
    NonComposablePath,
    SameVertex,
    UnknownEdge,
)

Letter = Tuple[str, int]
Word = Tuple[Letter, ...]


def invert_word(w: Sequence[Letter]) -> Word:
    return tuple((e, -s) for e, s in reversed(w))


def reduce_word(w: Sequence[Letter]) -> Word:
    """Free reduction (cancel adjacent ``x x⁻¹`` pairs)."""
    out: List[Letter] = []
    for letter in w:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    rot2: int = 0

    @property
    def rot(self) -> Fraction:
        return Fraction(self.rot2, 2)


@dataclass(frozen=True)
class HalfEdge:
    id: str
    vertex: str
    position: int
    edge: str
    end: str  # "tail" or "head"


@dataclass(frozen=True)
class SurfaceInfo:
    boundary_components: int
    genus: int
    vertices: int
    edges: int


class Skeleton:
    """Immutable ribbon graph with rotation data.

    ``vertices`` is a sequence of ``(vertex_id, [half-edge ids])`` and
    ``edges`` a sequence of :class:`Edge`.
    """

    def __init__(self, vertices, edges, check: bool = True):
        self.vertices: Tuple[Tuple[str, Tuple[str, ...]], ...] = tuple(
            (str(v), tuple(hs)) for v, hs in vertices
        )
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self._edge_map: Dict[str, Edge] = {e.id: e for e in self.edges}
        self._half: Dict[str, HalfEdge] = {}
        for v, hs in self.vertices:
            for pos, h in enumerate(hs):
                if h in self._half:
                    if check:
                        raise MalformedSkeleton(f"half-edge {h!r} appears twice in vertex lists")
                    continue
                self._half[h] = HalfEdge(h, v, pos, "", "")
        owners: Dict[str, Tuple[str, str]] = {}
        for e in self.edges:
            for end, h in (("tail", e.tail), ("head", e.head)):
                if h in owners and check:
                    raise MalformedSkeleton(f"half-edge {h!r} belongs to two edges")
                owners[h] = (e.id, end)
        for h, he in list(self._half.items()):
            if h in owners:
                self._half[h] = HalfEdge(h, he.vertex, he.position, *owners[h])
        if check:
            self.validate()

    # lookups ---------------------------------------------------------------
    def edge(self, eid: str) -> Edge:
        try:
            return self._edge_map[eid]
        except KeyError:
            raise UnknownEdge(f"unknown edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._edge_map

    def half_edge(self, hid: str) -> HalfEdge:
        try:
            return self._half[hid]
        except KeyError:
            raise UnknownEdge(f"unknown half-edge {hid!r}") from None

    def vertex_ids(self) -> List[str]:
        return [v for v, _ in self.vertices]

    def half_edges_at(self, vid: str) -> Tuple[str, ...]:
        for v, hs in self.vertices:
            if v == vid:
                return hs
        raise UnknownEdge(f"unknown vertex {vid!r}")

    def edge_ids(self) -> List[str]:
        return [e.id for e in self.edges]

    def rot2(self, eid: str) -> int:
        return self.edge(eid).rot2

    def start_half_edge(self, letter: Letter) -> str:
        e = self.edge(letter[0])
        return e.tail if letter[1] > 0 else e.head

    def end_half_edge(self, letter: Letter) -> str:
        e = self.edge(letter[0])
        return e.head if letter[1] > 0 else e.tail

    def start_vertex(self, letter: Letter) -> str:
        return self._half[self.start_half_edge(letter)].vertex

    def end_vertex(self, letter: Letter) -> str:
        return self._half[self.end_half_edge(letter)].vertex

    def with_rotations(self, rot2: Dict[str, int]) -> "Skeleton":
        edges = [Edge(e.id, e.tail, e.head, int(rot2.get(e.id, e.rot2))) for e in self.edges]
        return Skeleton(self.vertices, edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Skeleton)
            and self.vertices == other.vertices
            and sorted(self.edges, key=lambda e: e.id) == sorted(other.edges, key=lambda e: e.id)
        )

    def __hash__(self):
        return hash((self.vertices, tuple(sorted(self.edges, key=lambda e: e.id))))

    def __repr__(self):
        return f"Skeleton(vertices={list(self.vertices)}, edges={list(self.edges)})"

    # checks ----------------------------------------------------------------
    def validate(self) -> SurfaceInfo:
        if not self.vertices:
            raise MalformedSkeleton("a skeleton needs at least one vertex")
        ids = [v for v, _ in self.vertices]
        if len(set(ids)) != len(ids):
            raise MalformedSkeleton("duplicate vertex id")
        eids = [e.id for e in self.edges]
        if len(set(eids)) != len(eids):
            raise MalformedSkeleton("duplicate edge id")
        listed = set(self._half)
        used = set()
        for e in self.edges:
            if e.tail == e.head:
                raise MalformedSkeleton(f"edge {e.id!r} uses one half-edge twice")
            for h in (e.tail, e.head):
                if h not in listed:
                    raise MalformedSkeleton(f"half-edge {h!r} of edge {e.id!r} is not in any vertex list")
                used.add(h)
        orphans = listed - used
        if orphans:
            raise MalformedSkeleton(f"half-edges without an edge: {sorted(orphans)}")
        # connectivity
        adj: Dict[str, set] = {v: set() for v in ids}
        for e in self.edges:
            a, b = self._half[e.tail].vertex, self._half[e.head].vertex
            adj[a].add(b)
            adj[b].add(a)
        seen = {ids[0]}
        stack = [ids[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(ids):
            raise MalformedSkeleton("underlying graph is not connected")
        faces = self.boundary_cycles()
        chi = len(ids) - len(self.edges)
        # closing every boundary circle with a disk gives Euler characteristic 2 - 2g
        twice_genus = 2 - chi - len(faces)
        if twice_genus < 0 or twice_genus % 2:
            raise MalformedSkeleton("inconsistent Euler characteristic")
        return SurfaceInfo(len(faces), twice_genus // 2, len(ids), len(self.edges))

    def _partner(self, h: str) -> str:
        he = self._half[h]
        e = self._edge_map[he.edge]
        return e.head if he.end == "tail" else e.tail

    def _ccw_next(self, h: str) -> str:
        he = self._half[h]
        hs = self.half_edges_at(he.vertex)
        return hs[(he.position + 1) % len(hs)]

    def boundary_cycles(self) -> List[List[str]]:
        """Boundary components, each as the cyclic list of half-edges met."""
        remaining = set(self._half)
        out = []
        for start in sorted(self._half, key=lambda h: (self._half[h].vertex, self._half[h].position)):
            if start not in remaining:
                continue
            cyc = []
            h = start
            while h in remaining:
                remaining.discard(h)
                cyc.append(h)
                h = self._ccw_next(self._partner(h))
            out.append(cyc)
        return out

    def info(self) -> SurfaceInfo:
        return self.validate()

    # words -----------------------------------------------------------------
    def check_path(self, w: Sequence[Letter], closed: bool = False) -> None:
        for e, s in w:
            self.edge(e)
            if s not in (1, -1):
                raise NonComposablePath(f"bad exponent {s} on {e!r}")
        for k in range(1, len(w)):
            # w[k] is walked just before w[k-1]
            if self.end_vertex(w[k]) != self.start_vertex(w[k - 1]):
                raise NonComposablePath(f"letters {k} and {k - 1} do not meet at a vertex")
        if closed and w and self.end_vertex(w[0]) != self.start_vertex(w[-1]):
            raise NonComposablePath("word does not close up")

    def passage_turn2(self, arriving: Letter, departing: Letter) -> int:
        """Twice the half-turn made when passing a vertex.

        +1 when the outgoing half-edge comes after the incoming one in the
        vertex order, -1 otherwise.
        """
        a = self._half[self.end_half_edge(arriving)].position
        b = self._half[self.start_half_edge(departing)].position
        return 1 if b > a else -1

    def path_rotation2(self, w: Sequence[Letter], closed: bool = False) -> int:
        self.check_path(w, closed)
        total = sum(s * self.edge(e).rot2 for e, s in w)
        for k in range(1, len(w)):
            total += self.passage_turn2(w[k], w[k - 1])
        if closed and len(w) > 0:
            total += self.passage_turn2(w[0], w[-1])
        return total

    def path_rotation(self, w: Sequence[Letter], closed: bool = False) -> Fraction:
        return Fraction(self.path_rotation2(w, closed), 2)

    # serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "halfedges": list(hs)} for v, hs in self.vertices],
            "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "rot2": e.rot2} for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Skeleton":
        try:
            verts = [(v["id"], list(v["halfedges"])) for v in data["vertices"]]
            edges = [Edge(str(e["id"]), str(e["tail"]), str(e["head"]), int(e.get("rot2", 0))) for e in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedSkeleton(f"bad skeleton description: {exc}") from None
        return cls(verts, edges)


def validate(sk: Skeleton) -> SurfaceInfo:
    return sk.validate()


def path_rotation(sk: Skeleton, w: Sequence[Letter], closed: bool = False) -> Fraction:
    return sk.path_rotation(w, closed)


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkeletonMoveMap:
    """A move between skeletons.

    ``forward`` expresses each source edge as a word in target edges and
    ``backward`` each target edge as a word in source edges.
    """

    source: Skeleton
    target: Skeleton
    forward: Dict[str, Word] = field(default_factory=dict)
    backward: Dict[str, Word] = field(default_factory=dict)

    def transport(self, w: Sequence[Letter]) -> Word:
        """Rewrite a source word in target edges."""
        return substitute(w, self.forward)

    def pullback(self, w: Sequence[Letter]) -> Word:
        """Rewrite a target word in source edges."""
        return substitute(w, self.backward)

    def then(self, other: "SkeletonMoveMap") -> "SkeletonMoveMap":
        fwd = {e: other.transport(w) for e, w in self.forward.items()}
        bwd = {e: self.pullback(w) for e, w in other.backward.items()}
        return SkeletonMoveMap(self.source, other.target, fwd, bwd)


def identity_move(sk: Skeleton) -> SkeletonMoveMap:
    ids = {e: ((e, 1),) for e in sk.edge_ids()}
    return SkeletonMoveMap(sk, sk, dict(ids), dict(ids))


def substitute(w: Sequence[Letter], table: Dict[str, Word]) -> Word:
    out: List[Letter] = []
    for e, s in w:
        piece = table.get(e, ((e, 1),))
        out.extend(piece if s > 0 else invert_word(piece))
    return reduce_word(out)


def reverse_edge(sk: Skeleton, eid: str) -> Tuple[Skeleton, SkeletonMoveMap]:
    e = sk.edge(eid)
    edges = [Edge(x.id, x.head, x.tail, -x.rot2) if x.id == eid else x for x in sk.edges]
    new = Skeleton(sk.vertices, edges)
    table = {x.id: ((x.id, 1),) for x in sk.edges}
    table[e.id] = ((e.id, -1),)
    return new, SkeletonMoveMap(sk, new, dict(table), dict(table))


def slide(sk: Skeleton, moving: str, along: str, end: Optional[str] = None) -> Tuple[Skeleton, SkeletonMoveMap]:
    """Slide the half-edge ``moving`` along the edge ``along``.

    ``moving`` must sit next to an end of ``along`` in its vertex order; it is
    carried along the side of ``along``'s ribbon it touches and reattached
    next to the opposite end.  ``end`` ("head" or "tail") picks the end of
    ``along`` to start from when both would do.
    """
    h = sk.half_edge(moving)
    e1 = sk.edge(along)
    if h.edge == e1.id:
        raise IllegalSlide("cannot slide an edge along itself")
    candidates = []
    for which, anchor in (("head", e1.head), ("tail", e1.tail)):
        a = sk.half_edge(anchor)
        if a.vertex == h.vertex and abs(a.position - h.position) == 1:
            candidates.append((which, anchor, h.position - a.position))
    if end is not None:
        candidates = [c for c in candidates if c[0] == end]
    if not candidates:
        raise IllegalSlide(f"half-edge {moving!r} is not next to an end of {along!r}")
    which, anchor, side = candidates[0]
    target_anchor = e1.tail if which == "head" else e1.head
    # the ribbon side that is counter-clockwise-next at one end is
    # counter-clockwise-previous at the other
    insert_after = side < 0
    lists = {v: list(hs) for v, hs in sk.vertices}
    lists[h.vertex].remove(moving)
    tv = sk.half_edge(target_anchor).vertex
    idx = lists[tv].index(target_anchor)
    lists[tv].insert(idx + 1 if insert_after else idx, moving)
    # the letter walking ``along`` from the old attachment to the new one
    c: Letter = (e1.id, -1) if which == "head" else (e1.id, 1)
    e2 = sk.edge(h.edge)
    if h.end == "head":
        old_word: Word = (c, (e2.id, 1))
        new_word: Word = (invert_word((c,))[0], (e2.id, 1))
    else:
        old_word = ((e2.id, 1), invert_word((c,))[0])
        new_word = ((e2.id, 1), c)
    rot2 = sk.path_rotation2(old_word)
    edges = [Edge(x.id, x.tail, x.head, rot2) if x.id == e2.id else x for x in sk.edges]
    new = Skeleton([(v, lists[v]) for v, _ in sk.vertices], edges)
    fwd = {x.id: ((x.id, 1),) for x in sk.edges}
    bwd = dict(fwd)
    fwd[e2.id] = new_word
    bwd[e2.id] = old_word
    return new, SkeletonMoveMap(sk, new, fwd, bwd)


def slide_options(sk: Skeleton) -> List[Tuple[str, str, str]]:
    """All legal ``(moving, along, end)`` slide arguments."""
    out = []
    for e1 in sk.edges:
        for which, anchor in (("head", e1.head), ("tail", e1.tail)):
            a = sk.half_edge(anchor)
            hs = sk.half_edges_at(a.vertex)
            for pos in (a.position - 1, a.position + 1):
                if 0 <= pos < len(hs) and sk.half_edge(hs[pos]).edge != e1.id:
                    out.append((hs[pos], e1.id, which))
    return out


def fuse(sk1: Skeleton, p1: str, sk2: Optional[Skeleton], p2: str) -> Skeleton:
    """Merge vertex ``p1`` with ``p2`` (p1's half-edges first)."""
    if sk2 is None or sk2 is sk1:
        if p1 == p2:
            raise SameVertex(f"cannot fuse {p1!r} with itself")
        verts = list(sk1.vertices)
        edges = list(sk1.edges)
    else:
        clash = set(sk1.vertex_ids()) & set(sk2.vertex_ids())
        clash |= set(sk1.edge_ids()) & set(sk2.edge_ids())
        if clash:
            raise MalformedSkeleton(f"skeletons share ids {sorted(clash)}")
        verts = list(sk1.vertices) + list(sk2.vertices)
        edges = list(sk1.edges) + list(sk2.edges)
    lists = dict(verts)
    if p1 not in lists or p2 not in lists:
        raise UnknownEdge("unknown vertex in fusion")
    merged = tuple(lists[p1]) + tuple(lists[p2])
    out = []
    for v, hs in verts:
        if v == p1:
            out.append((v, merged))
        elif v != p2:
            out.append((v, hs))
    return Skeleton(out, edges)


# ---------------------------------------------------------------------------
# standard skeletons
# ---------------------------------------------------------------------------


def torus() -> Skeleton:
    """One-holed torus: two interleaved loops at one vertex."""
    return Skeleton(
        [("v0", ["a+", "b+", "a-", "b-"])],
        [Edge("a", "a+", "a-"), Edge("b", "b+", "b-")],
    )


def pants() -> Skeleton:
    """Pair of pants: two nested loops at one vertex."""
    return Skeleton(
        [("v0", ["a+", "a-", "b+", "b-"])],
        [Edge("a", "a+", "a-"), Edge("b", "b+", "b-")],
    )


def genus2() -> Skeleton:
    """One-holed genus two surface."""
    return Skeleton(
        [("v0", ["a+", "b+", "a-", "b-", "c+", "d+", "c-", "d-"])],
        [Edge("a", "a+", "a-"), Edge("b", "b+", "b-"), Edge("c", "c+", "c-"), Edge("d", "d+", "d-")],
    )


def annulus2() -> Skeleton:
    """Annulus with a marked point on each boundary circle (two vertices)."""
    return Skeleton(
        [("p", ["e+", "f+"]), ("q", ["f-", "e-"])],
        [Edge("e", "e+", "e-"), Edge("f", "f+", "f-")],
    )


BUILTIN_SKELETONS = {"torus": torus, "pants": pants, "genus2": genus2, "annulus2": annulus2}


def builtin(name: str) -> Skeleton:
    try:
        return BUILTIN_SKELETONS[name]()
    except KeyError:
        raise UnknownEdge(f"unknown built-in surface {name!r}") from None
