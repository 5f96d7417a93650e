"""Loops and paths on a skeleton, their realizations and string operations.

Loops are cyclic words in edges (see :mod:`artifact.surface` for the word
conventions).  A realization draws every letter as a strand along its edge's
ribbon; strands only meet inside the vertex disks, where each passage through
a vertex is a straight chord between two boundary slots.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import NonClosedWord, ParseError, ProperPowerUnsupported
from .surface import Letter, Skeleton, Word, invert_word, reduce_word

# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def _letter_key(letter: Letter):
    return (letter[0], 0 if letter[1] > 0 else 1)


def format_word(w: Sequence[Letter]) -> str:
    if not w:
        return "◯"
    return " ".join(e if s > 0 else e + "'" for e, s in w)


_TOKEN = re.compile(r"[^\s.]+")


def parse_word(text: str, sk: Optional[Skeleton] = None) -> Word:
    """Parse ``"a b a' b^-1"`` style words.

    Tokens are separated by whitespace or ``.``; a trailing ``'`` or ``^-1``
    inverts.  When a skeleton is given, unknown edges raise ParseError and a
    token such as ``ab'`` is split into single-character edges if needed.
    """
    letters: List[Letter] = []
    text = text.strip()
    if text in ("", "◯", "1", "()"):
        return ()
    for m in _TOKEN.finditer(text):
        tok = m.group(0)
        letters.extend(_parse_token(tok, m.start(), sk))
    return tuple(letters)


def _split_suffix(tok: str) -> Tuple[str, int]:
    sign = 1
    while True:
        if tok.endswith("'"):
            tok, sign = tok[:-1], -sign
        elif tok.endswith("^-1"):
            tok, sign = tok[:-3], -sign
        else:
            return tok, sign


def _parse_token(tok: str, pos: int, sk: Optional[Skeleton]) -> List[Letter]:
    name, sign = _split_suffix(tok)
    if not name:
        raise ParseError(f"empty letter in {tok!r}", pos)
    if sk is None or sk.has_edge(name):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"bad edge name {name!r}", pos)
        return [(name, sign)]
    # fall back to single-character letters, e.g. "ab'"
    out: List[Letter] = []
    i = 0
    while i < len(tok):
        ch = tok[i]
        if not sk.has_edge(ch):
            raise ParseError(f"unknown edge {ch!r}", pos + i)
        i += 1
        s = 1
        while True:
            if tok.startswith("'", i):
                s, i = -s, i + 1
            elif tok.startswith("^-1", i):
                s, i = -s, i + 3
            else:
                break
        out.append((ch, s))
    return out


def cyclic_reduce(w: Sequence[Letter]) -> Word:
    w = list(reduce_word(w))
    while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
        w = w[1:-1]
    return tuple(w)


def least_rotation(w: Sequence[Letter]) -> Word:
    if not w:
        return ()
    keys = [_letter_key(x) for x in w]
    n = len(w)
    best = min(range(n), key=lambda k: keys[k:] + keys[:k])
    return tuple(w[best:]) + tuple(w[:best])


@dataclass(frozen=True, order=False)
class CyclicWord:
    """A free homotopy class of loops, stored in canonical form."""

    letters: Word

    def __str__(self):
        return format_word(self.letters)

    def __repr__(self):
        return f"|{self}|"

    def is_trivial(self) -> bool:
        return not self.letters

    def sort_key(self):
        return (0, len(self.letters), tuple(_letter_key(x) for x in self.letters))


CIRCLE = CyclicWord(())


@dataclass(frozen=True)
class PathWord:
    """A path in the skeleton from a marked point to a marked point."""

    letters: Word

    def __str__(self):
        return format_word(self.letters)


@dataclass(frozen=True)
class HBasis:
    """The i-th basis vector of H₁ (non-tree edges in skeleton order)."""

    index: int

    def __repr__(self):
        return f"H{self.index}"

    def sort_key(self):
        return (1, self.index)


def canonicalize(w: Union[str, Sequence[Letter]], sk: Optional[Skeleton] = None) -> CyclicWord:
    if isinstance(w, str):
        w = parse_word(w, sk)
    w = tuple(w)
    if sk is not None and w:
        try:
            sk.check_path(w, closed=True)
        except Exception as exc:
            raise NonClosedWord(str(exc)) from None
    return CyclicWord(least_rotation(cyclic_reduce(w)))


def primitive_root(w: CyclicWord) -> Tuple[Word, int]:
    n = len(w.letters)
    for d in range(1, n):
        if n % d == 0 and w.letters == w.letters[:d] * (n // d):
            return w.letters[:d], n // d
    return w.letters, 1


def is_proper_power(w: CyclicWord) -> bool:
    return primitive_root(w)[1] > 1


def cyclic_slice(w: Sequence[Letter], start: int, stop: int) -> Word:
    """Letters ``start, start+1, ..., stop-1`` read cyclically."""
    w = tuple(w)
    if start < stop:
        return w[start:stop]
    return w[start:] + w[:stop]


def rotate(w: Sequence[Letter], k: int) -> Word:
    w = tuple(w)
    return w[k:] + w[:k]


# ---------------------------------------------------------------------------
# formal sums and wedges
# ---------------------------------------------------------------------------


def _gen_key(g):
    return g.sort_key()


def wedge_normalize(gens: Sequence) -> Tuple[int, Tuple]:
    """Sort odd generators; returns (sign, sorted tuple) or (0, ()) if zero."""
    gens = list(gens)
    for g in gens:
        if isinstance(g, CyclicWord) and g.is_trivial():
            return 0, ()
    keys = [_gen_key(g) for g in gens]
    if len(set(keys)) != len(keys):
        return 0, ()
    order = sorted(range(len(gens)), key=lambda i: keys[i])
    inv = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
    return (-1 if inv & 1 else 1), tuple(gens[i] for i in order)


class FormalSum(dict):
    """A finite rational combination of hashable basis objects."""

    def add(self, key, coeff) -> "FormalSum":
        coeff = Fraction(coeff)
        if not coeff:
            return self
        v = self.get(key, Fraction(0)) + coeff
        if v:
            self[key] = v
        else:
            self.pop(key, None)
        return self

    def __add__(self, other: "FormalSum") -> "FormalSum":
        out = FormalSum(self)
        for k, v in other.items():
            out.add(k, v)
        return out

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        return self + other.scale(-1)

    def scale(self, c) -> "FormalSum":
        c = Fraction(c)
        out = FormalSum()
        if c:
            for k, v in self.items():
                out[k] = v * c
        return out

    def is_zero(self) -> bool:
        return not any(self.values())

    def __eq__(self, other):
        if not isinstance(other, dict):
            return NotImplemented
        a = {k: v for k, v in self.items() if v}
        b = {k: v for k, v in other.items() if v}
        return a == b

    __hash__ = None

    def __repr__(self):
        if not self:
            return "0"
        parts = []
        for k, v in sorted(self.items(), key=lambda kv: _sum_key(kv[0])):
            parts.append(f"{format_coeff(v)}{format_basis(k)}")
        return " + ".join(parts)


def _sum_key(k):
    if isinstance(k, tuple):
        return (len(k), tuple(_gen_key(g) for g in k))
    return (0, _gen_key(k))


def format_coeff(v) -> str:
    v = Fraction(v)
    if v == 1:
        return ""
    if v == -1:
        return "-"
    return f"{v}*"


def format_basis(k) -> str:
    if isinstance(k, tuple):
        if not k:
            return "1"
        return " ∧ ".join(format_basis(g) for g in k)
    if isinstance(k, CyclicWord):
        return f"|{k}|"
    return repr(k)


def single(key, coeff=1) -> FormalSum:
    return FormalSum().add(key, coeff)


def as_sum(x) -> FormalSum:
    if isinstance(x, FormalSum):
        return x
    if isinstance(x, dict):
        return FormalSum(x)
    return single(x)


def wedge_sum(*parts: FormalSum) -> FormalSum:
    """Wedge product of formal sums whose keys are generators or monomials."""
    out = FormalSum().add((), 1)
    for p in parts:
        nxt = FormalSum()
        for k1, c1 in out.items():
            for k2, c2 in p.items():
                g2 = k2 if isinstance(k2, tuple) else (k2,)
                s, key = wedge_normalize(k1 + g2)
                if s:
                    nxt.add(key, s * c1 * c2)
        out = nxt
    return out


# ---------------------------------------------------------------------------
# realizations
# ---------------------------------------------------------------------------

MARK = (-1, 0)


@dataclass(frozen=True)
class Segment:
    """The piece of item ``item`` inside a vertex disk.

    ``split`` is the index ``k`` with holonomy ``w[:k] · (here) · w[k:]``.
    Slots are ``(half-edge position, index)``; ``MARK`` is the marked point.
    """

    item: int
    split: int
    vertex: str
    in_slot: Tuple[int, int]
    out_slot: Tuple[int, int]
    in_half_edge: Optional[str]
    out_half_edge: Optional[str]


@dataclass(frozen=True)
class Crossing:
    vertex: str
    first: Segment
    second: Segment
    sign: int
    location: str  # "interior" or "boundary"

    @property
    def weight(self) -> Fraction:
        return Fraction(1) if self.location == "interior" else Fraction(1, 2)


@dataclass
class LoopDiagram:
    skeleton: Skeleton
    items: List[Tuple[Word, bool]]
    strand_order: Dict[str, List[Tuple[int, int]]]
    segments: List[Segment]
    slots: Dict[str, List[Tuple[Tuple[int, int], Tuple[int, int]]]]

    def rotation2(self, item: int) -> int:
        w, closed = self.items[item]
        return self.skeleton.path_rotation2(w, closed)


def _system_items(system) -> List[Tuple[Word, bool]]:
    items = []
    for x in system:
        if isinstance(x, CyclicWord):
            items.append((x.letters, True))
        elif isinstance(x, PathWord):
            items.append((tuple(x.letters), False))
        else:
            w, closed = x
            items.append((tuple(w), bool(closed)))
    return items


def realize(
    sk: Skeleton,
    system: Iterable,
    seed: int = 0,
    edge_orders: Optional[Dict[str, List[Tuple[int, int]]]] = None,
    allow_powers: bool = False,
) -> LoopDiagram:
    """Draw a loop/path system transversally on the fattened skeleton.

    Passages along each edge are ordered by a seeded shuffle (or by
    ``edge_orders`` when given).  Index 0 is the leftmost strand when looking
    from tail to head; the head end lists strands in that order and the tail
    end in reverse.  Proper powers are rejected unless ``allow_powers``;
    the bracket operations enable it since brackets of primitive classes can
    produce powers.
    """
    items = _system_items(system)
    for w, closed in items:
        sk.check_path(w, closed)
        if closed:
            if w and reduce_word(w) != tuple(w):
                raise ValueError("loop words must be reduced")
            if w and not allow_powers and is_proper_power(CyclicWord(least_rotation(w))):
                raise ProperPowerUnsupported(f"|{format_word(w)}| is a proper power")
        else:
            if not w:
                raise ValueError("empty paths cannot be realized")
    rng = random.Random(seed)
    order: Dict[str, List[Tuple[int, int]]] = {e: [] for e in sk.edge_ids()}
    for k, (w, _) in enumerate(items):
        for j, (e, _s) in enumerate(w):
            order[e].append((k, j))
    for e in sk.edge_ids():
        if edge_orders and e in edge_orders:
            if sorted(edge_orders[e]) != sorted(order[e]):
                raise ValueError(f"edge order for {e!r} does not match the passages")
            order[e] = list(edge_orders[e])
        else:
            rng.shuffle(order[e])
    index = {}
    for e, lst in order.items():
        for i, p in enumerate(lst):
            index[p] = i

    def slot(k: int, j: int, at_head: bool) -> Tuple[Tuple[int, int], str]:
        e, _ = items[k][0][j]
        edge = sk.edge(e)
        h = edge.head if at_head else edge.tail
        i = index[(k, j)]
        if not at_head:
            i = len(order[e]) - 1 - i
        return (sk.half_edge(h).position, i), h

    segments: List[Segment] = []
    for k, (w, closed) in enumerate(items):
        n = len(w)
        splits = range(n) if closed else range(n + 1)
        for j in splits:
            if not closed and j == n:
                # start of the path: from the marked point out along w[n-1]
                dep = w[n - 1]
                out_slot, out_h = slot(k, n - 1, dep[1] < 0)
                v = sk.start_vertex(dep)
                segments.append(Segment(k, j, v, MARK, out_slot, None, out_h))
                continue
            arr = w[j]
            in_slot, in_h = slot(k, j, arr[1] > 0)
            v = sk.end_vertex(arr)
            if not closed and j == 0:
                segments.append(Segment(k, j, v, in_slot, MARK, in_h, None))
                continue
            jd = (j - 1) % n
            dep = w[jd]
            out_slot, out_h = slot(k, jd, dep[1] < 0)
            segments.append(Segment(k, j, v, in_slot, out_slot, in_h, out_h))
    slots: Dict[str, list] = {}
    for s in segments:
        slots.setdefault(s.vertex, []).append((s.in_slot, s.out_slot))
    return LoopDiagram(sk, items, order, segments, slots)


def _chord_sign(s1, t1, s2, t2) -> int:
    """+1 iff the cyclic order of the four points is (s1, s2, t1, t2)."""
    pts = sorted([(s1, 0), (s2, 1), (t1, 2), (t2, 3)])
    labels = [lab for _, lab in pts]
    k = labels.index(0)
    labels = labels[k:] + labels[:k]
    return 1 if labels == [0, 1, 2, 3] else -1


def _links(a1, b1, a2, b2) -> bool:
    lo, hi = min(a1, b1), max(a1, b1)
    return (lo < a2 < hi) != (lo < b2 < hi)


def segment_pair_sign(a: Segment, b: Segment) -> Tuple[int, Optional[str]]:
    """Sign and location of the intersection of two segments (0 if none)."""
    if a.vertex != b.vertex:
        return 0, None
    a_mark = MARK in (a.in_slot, a.out_slot)
    b_mark = MARK in (b.in_slot, b.out_slot)
    if a_mark and b_mark:
        sa = 1 if a.in_slot == MARK else -1
        sb = 1 if b.in_slot == MARK else -1
        pa = a.out_slot if a.in_slot == MARK else a.in_slot
        pb = b.out_slot if b.in_slot == MARK else b.in_slot
        return sa * sb * (1 if pa < pb else -1), "boundary"
    if not _links(a.in_slot, a.out_slot, b.in_slot, b.out_slot):
        return 0, None
    return _chord_sign(a.in_slot, a.out_slot, b.in_slot, b.out_slot), "interior"


def crossings(d: LoopDiagram) -> List[Crossing]:
    by_vertex: Dict[str, List[Segment]] = {}
    for s in d.segments:
        by_vertex.setdefault(s.vertex, []).append(s)
    out = []
    for v, segs in by_vertex.items():
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                sign, loc = segment_pair_sign(segs[i], segs[j])
                if sign:
                    out.append(Crossing(v, segs[i], segs[j], sign, loc))
    return out


# ---------------------------------------------------------------------------
# Goldman bracket and Turaev cobracket
# ---------------------------------------------------------------------------


def _words_of(x) -> FormalSum:
    x = as_sum(x)
    out = FormalSum()
    for k, v in x.items():
        if isinstance(k, tuple) and len(k) == 1:
            k = k[0]
        out.add(k, v)
    return out


def bracket_words(sk: Skeleton, u: CyclicWord, v: CyclicWord, seed: int = 0) -> FormalSum:
    """Goldman bracket of two loop classes (◯ kept when it appears)."""
    out = FormalSum()
    if u.is_trivial() or v.is_trivial():
        return out
    d = realize(sk, [u, v], seed, allow_powers=True)
    for c in crossings(d):
        if c.first.item == c.second.item:
            continue
        a, b, sign = c.first, c.second, c.sign
        if a.item == 1:
            a, b, sign = b, a, -sign
        merged = rotate(v.letters, b.split) + rotate(u.letters, a.split)
        out.add(canonicalize(merged), sign)
    return out


def goldman_bracket(sk: Skeleton, x, y, seed: int = 0, keep_circle: bool = True) -> FormalSum:
    out = FormalSum()
    for u, cu in _words_of(x).items():
        for v, cv in _words_of(y).items():
            for k, c in bracket_words(sk, u, v, seed).items():
                if k.is_trivial() and not keep_circle:
                    continue
                out.add(k, c * cu * cv)
    return out


def cobracket_word(sk: Skeleton, u: CyclicWord, seed: int = 0) -> FormalSum:
    out = FormalSum()
    if u.is_trivial():
        return out
    d = realize(sk, [u], seed, allow_powers=True)
    for c in crossings(d):
        k, l = c.first.split, c.second.split
        first = canonicalize(cyclic_slice(u.letters, l, k))
        second = canonicalize(cyclic_slice(u.letters, k, l))
        if first.is_trivial() or second.is_trivial():
            continue
        s, key = wedge_normalize((first, second))
        if s:
            out.add(key, s * c.sign)
    return out


def turaev_cobracket(sk: Skeleton, x, seed: int = 0) -> FormalSum:
    out = FormalSum()
    for u, cu in _words_of(x).items():
        if isinstance(u, CyclicWord):
            for k, c in cobracket_word(sk, u, seed).items():
                out.add(k, c * cu)
    return out


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


def spanning_tree(sk: Skeleton) -> Tuple[set, Dict[str, Word]]:
    """Tree edges and, for each vertex, a tree path from the base vertex."""
    base = sk.vertex_ids()[0]
    paths: Dict[str, Word] = {base: ()}
    tree = set()
    changed = True
    while changed:
        changed = False
        for e in sk.edges:
            u = sk.half_edge(e.tail).vertex
            w = sk.half_edge(e.head).vertex
            if u in paths and w not in paths:
                paths[w] = ((e.id, 1),) + paths[u]
                tree.add(e.id)
                changed = True
            elif w in paths and u not in paths:
                paths[u] = ((e.id, -1),) + paths[w]
                tree.add(e.id)
                changed = True
    return tree, paths


def h1_edges(sk: Skeleton) -> List[str]:
    tree, _ = spanning_tree(sk)
    return [e for e in sk.edge_ids() if e not in tree]


def homology_class(sk: Skeleton, w) -> Tuple[int, ...]:
    letters = w.letters if isinstance(w, (CyclicWord, PathWord)) else tuple(w)
    basis = h1_edges(sk)
    pos = {e: i for i, e in enumerate(basis)}
    vec = [0] * len(basis)
    for e, s in letters:
        if e in pos:
            vec[pos[e]] += s
    return tuple(vec)


def basis_loop(sk: Skeleton, i: int) -> CyclicWord:
    """A loop representing the i-th H₁ basis vector."""
    _, paths = spanning_tree(sk)
    e = sk.edge(h1_edges(sk)[i])
    u = sk.half_edge(e.tail).vertex
    w = sk.half_edge(e.head).vertex
    word = invert_word(paths[w]) + ((e.id, 1),) + paths[u]
    return canonicalize(word)


def _pairing_matrix(sk: Skeleton) -> List[List[int]]:
    n = len(h1_edges(sk))
    m = [[0] * n for _ in range(n)]
    loops = [basis_loop(sk, i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = realize(sk, [loops[i], loops[j]], 0)
            total = 0
            for c in crossings(d):
                if c.first.item != c.second.item:
                    total += c.sign if c.first.item == 0 else -c.sign
            m[i][j] = total
            m[j][i] = -total
    return m


_PAIRING_CACHE: Dict[str, List[List[int]]] = {}


def intersection_matrix(sk: Skeleton) -> List[List[int]]:
    key = sk.dumps()
    if key not in _PAIRING_CACHE:
        _PAIRING_CACHE[key] = _pairing_matrix(sk)
    return _PAIRING_CACHE[key]


def intersection_pairing_h1(sk: Skeleton, u: Sequence, v: Sequence) -> Fraction:
    m = intersection_matrix(sk)
    return sum((Fraction(a) * b * m[i][j] for i, a in enumerate(u) for j, b in enumerate(v)), Fraction(0))


def h1_vector_sum(vec: Sequence) -> FormalSum:
    out = FormalSum()
    for i, c in enumerate(vec):
        out.add(HBasis(i), c)
    return out


def extended_bracket(sk: Skeleton, x, y, keep_circle: bool = True, seed: int = 0) -> FormalSum:
    """Goldman bracket extended to loop classes ⊕ H₁."""
    out = FormalSum()
    m = intersection_matrix(sk)
    for a, ca in _words_of(x).items():
        for b, cb in _words_of(y).items():
            c = ca * cb
            if isinstance(a, CyclicWord) and isinstance(b, CyclicWord):
                out = out + goldman_bracket(sk, a, b, seed, keep_circle).scale(c)
            elif isinstance(a, CyclicWord) and isinstance(b, HBasis):
                if not a.is_trivial():
                    h = homology_class(sk, a)
                    out.add(a, c * sum(h[i] * m[i][b.index] for i in range(len(h))))
            elif isinstance(a, HBasis) and isinstance(b, CyclicWord):
                if not b.is_trivial():
                    h = homology_class(sk, b)
                    out.add(b, -c * sum(h[i] * m[i][a.index] for i in range(len(h))))
            else:
                if keep_circle:
                    out.add(CIRCLE, c * m[a.index][b.index])
    return out


def _cobracket_gen(sk: Skeleton, g, seed: int) -> FormalSum:
    if isinstance(g, CyclicWord):
        return cobracket_word(sk, g, seed)
    return FormalSum()


def bv_delta_wedge(sk: Skeleton, X, cobracket_scale=1, seed: int = 0) -> FormalSum:
    """The BV operator on the exterior algebra (◯ = 0)."""
    X = as_sum(X)
    out = FormalSum()
    scale = Fraction(cobracket_scale)
    for mono, coeff in X.items():
        gens = mono if isinstance(mono, tuple) else (mono,)
        n = len(gens)
        for i in range(n):
            for j in range(i + 1, n):
                sign = -1 if (i + j + 1 + 2) % 2 else 1  # 1-based (-1)^{i+j+1}
                br = extended_bracket(sk, gens[i], gens[j], keep_circle=False, seed=seed)
                rest = tuple(g for k, g in enumerate(gens) if k not in (i, j))
                out = out + wedge_sum(br, FormalSum().add(rest, 1)).scale(sign * coeff)
        for i in range(n):
            d = _cobracket_gen(sk, gens[i], seed)
            if not d:
                continue
            sign = -1 if i % 2 else 1
            left = FormalSum().add(gens[:i], 1)
            right = FormalSum().add(gens[i + 1:], 1)
            out = out + wedge_sum(left, d, right).scale(sign * coeff * scale)
    return out


def adjoint_on_wedge(sk: Skeleton, x, W: FormalSum, seed: int = 0, keep_circle: bool = False) -> FormalSum:
    """Derivation extension of ``[x, ·]`` to wedge monomials."""
    out = FormalSum()
    for mono, c in W.items():
        gens = mono if isinstance(mono, tuple) else (mono,)
        for i, g in enumerate(gens):
            br = extended_bracket(sk, x, g, keep_circle, seed)
            out = out + wedge_sum(FormalSum().add(gens[:i], 1), br, FormalSum().add(gens[i + 1:], 1)).scale(c)
    return out


def parse_element(text: str, sk: Skeleton) -> FormalSum:
    """Parse a word, ``H[..]`` vector or ``wedge(...)``/``∧(...)`` monomial."""
    text = text.strip()
    m = re.fullmatch(r"(?:wedge|∧)\s*\((.*)\)", text, flags=re.S)
    if m:
        parts = [p for p in m.group(1).split(",")]
        return wedge_sum(*[parse_element(p, sk) for p in parts])
    m = re.fullmatch(r"H\s*\[(.*)\]", text)
    if m:
        try:
            vec = [int(x) for x in m.group(1).split(",") if x.strip()]
        except ValueError:
            raise ParseError(f"bad H1 vector {text!r}", 0) from None
        if len(vec) != len(h1_edges(sk)):
            raise ParseError(f"H1 vector needs {len(h1_edges(sk))} entries", 0)
        return h1_vector_sum(vec)
    return single(canonicalize(parse_word(text, sk), sk))


def transport_element(move, X) -> FormalSum:
    """Rewrite loop classes and wedge monomials along a skeleton move."""
    out = FormalSum()
    for key, c in as_sum(X).items():
        if isinstance(key, tuple):
            sign, mono = wedge_normalize(tuple(_transport_gen(move, g) for g in key))
            if sign:
                out.add(mono, c * sign)
        else:
            out.add(_transport_gen(move, key), c)
    return out


def _transport_gen(move, g):
    if isinstance(g, CyclicWord):
        return canonicalize(move.transport(g.letters), move.target)
    return g
