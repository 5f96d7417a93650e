"""Moduli spaces of flat connections on a skeleton, and operators on them.

A point assigns a group element to every edge.  Functions are products of
atoms evaluated on holonomies of words.  Derivatives are computed with jets:
a direction ``x`` at half-edge ``a`` perturbs the edge element by a factor
``1 ± τx`` for a fresh nilpotent tag ``τ`` (one odd generator for odd ``x``,
a product of two for even ``x``) and the coefficient of the tag is read off.

The half-edge actions follow the convention that makes ``x ↦ (x)_a`` a Lie
algebra map: a half-edge where its edge arrives acts by ``g ↦ (1 - τx) g``,
one where it leaves acts by ``g ↦ g (1 + τx)``.
"""

from __future__ import annotations

import itertools
import functools
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

from .errors import LogdetNotEvaluable, NonComposablePath, ParseError, RetryExhausted
from .loops import LoopDiagram, crossings, parse_word
from .superalgebra import (
    EvenLieData,
    EvenMetricLieData,
    Grassmann,
    OddMetricLieData,
    QElement,
    SuperMatrix,
    aff1,
    build_gln,
    build_qn,
    mtrace,
    odd_double,
    odet,
    otr,
    qtrace,
    rational_det,
    rational_inverse,
    supertrace,
)
from .surface import Letter, Skeleton, Word, invert_word

ONE = Grassmann({0: 1})
Vector = Dict[int, Fraction]

# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _cached(builder, n: int):
    # the structure data is treated as read-only, so sharing it is safe
    return builder(n)


class GLGroup:
    """GL(n) over the rationals, realized by even supermatrices."""

    kind = "gl"

    def __init__(self, n: int):
        self.n = n
        self.lie = _cached(build_gln, n)

    @property
    def tag(self) -> str:
        return f"GL({self.n})"

    def identity(self):
        return SuperMatrix.identity([0] * self.n)

    def random_element(self, rng: random.Random, next_gen: int, retries: int = 100):
        for _ in range(retries):
            m = [[Fraction(rng.randint(-3, 3)) for _ in range(self.n)] for _ in range(self.n)]
            if rational_det(m) != 0:
                return SuperMatrix([0] * self.n, m), next_gen
        raise RetryExhausted("could not draw an invertible matrix")


class QGroup:
    """Q(n): group-valued points ``X + ξY`` with one odd generator per entry of Y."""

    kind = "q"

    def __init__(self, n: int):
        self.n = n
        self.lie = _cached(build_qn, n)

    @property
    def tag(self) -> str:
        return f"Q({self.n})"

    def identity(self):
        return QElement.identity(self.n)

    def random_element(self, rng: random.Random, next_gen: int, retries: int = 100):
        n = self.n
        for _ in range(retries):
            x = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
            if rational_det(x) != 0:
                break
        else:
            raise RetryExhausted("could not draw an invertible body")
        y = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(Grassmann.generator(next_gen))
                next_gen += 1
            y.append(row)
        return QElement(n, x, y), next_gen


class DoubleGroup:
    """The group of ``h ⋉ Πh*`` acting on ``h* | R``."""

    kind = "double"

    def __init__(self, h: Optional[EvenLieData] = None):
        self.h = h if h is not None else aff1()
        self.lie = odd_double(self.h)
        self.n = self.h.dim + 1

    @property
    def tag(self) -> str:
        return f"Double({','.join(self.h.names)})"

    def identity(self):
        return SuperMatrix.identity([0] * self.h.dim + [1])

    def random_element(self, rng: random.Random, next_gen: int, retries: int = 100):
        m = self.h.dim
        if self.h.group_sampler is None:
            raise RetryExhausted("no group sampler for this Lie algebra")
        coad = self.h.group_sampler(rng)
        rows = [[Grassmann.scalar(coad[i][j]) for j in range(m)] + [Grassmann.generator(next_gen + i)] for i in range(m)]
        rows.append([Grassmann()] * m + [ONE])
        return SuperMatrix([0] * m + [1], rows), next_gen + m


def make_group(tag: str, n: int = 1):
    tag = tag.lower()
    if tag == "gl":
        return GLGroup(n)
    if tag == "q":
        return QGroup(n)
    if tag in ("double", "aff1"):
        return DoubleGroup()
    raise ValueError(f"unknown group {tag!r}")


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


class ModuliPoint:
    """Edge assignment plus jet bookkeeping.

    ``next_gen`` is the first unused Grassmann generator index, ``insertions``
    maps ``(label, split)`` to extra factors placed inside labelled words, and
    ``depth`` counts the jet perturbations applied.
    """

    def __init__(self, skeleton: Skeleton, group, elements: Dict[str, object], next_gen: int, insertions=None, depth: int = 0, inverses=None):
        self.skeleton = skeleton
        self.group = group
        self.elements = dict(elements)
        self.next_gen = next_gen
        self.insertions: Dict[Tuple[Hashable, int], Tuple] = dict(insertions or {})
        self.depth = depth
        self._inverse: Dict[str, object] = dict(inverses or {})
        self._hol: Dict[Word, object] = {}

    @property
    def lie(self):
        return self.group.lie

    def element(self, letter: Letter):
        e, s = letter
        if e not in self.elements:
            raise NonComposablePath(f"no element for edge {e!r}")
        if s > 0:
            return self.elements[e]
        inv = self._inverse.get(e)
        if inv is None:
            inv = self.elements[e].inverse()
            self._inverse[e] = inv
        return inv

    def holonomy(self, w: Sequence[Letter], label: Hashable = None, check: bool = True):
        w = tuple(w)
        if check:
            self.skeleton.check_path(w)
        ins = {}
        if label is not None and self.insertions:
            ins = {s: f for (lab, s), f in self.insertions.items() if lab == label}
        if not ins:
            cached = self._hol.get(w)
            if cached is not None:
                return cached
        out = None
        for s in range(len(w) + 1):
            for factor in ins.get(s, ()):
                out = factor if out is None else out * factor
            if s < len(w):
                g = self.element(w[s])
                out = g if out is None else out * g
        if out is None:
            out = self.group.identity()
        if not ins:
            self._hol[w] = out
        return out

    def inverse_of(self, e: str):
        return self.element((e, -1))

    def with_elements(self, elements, next_gen: int, insertions=None, inverses=None) -> "ModuliPoint":
        return ModuliPoint(
            self.skeleton,
            self.group,
            elements,
            next_gen,
            self.insertions if insertions is None else insertions,
            self.depth + 1,
            inverses,
        )

    def transport(self, move) -> "ModuliPoint":
        """The point on ``move.target`` with the same holonomies."""
        elements = {e: self.holonomy(w, check=False) for e, w in move.backward.items()}
        return ModuliPoint(move.target, self.group, elements, self.next_gen)

    def to_json(self) -> dict:
        out = {}
        for e, g in sorted(self.elements.items()):
            if isinstance(g, QElement):
                out[e] = {"n": g.n, "X": [[x.to_json() for x in r] for r in g.X], "Y": [[y.to_json() for y in r] for r in g.Y]}
            else:
                out[e] = {"parities": list(g.parities), "M": [[x.to_json() for x in r] for r in g.M]}
        return {"group": self.group.tag, "elements": out}


def random_point(sk: Skeleton, group, seed: int = 0) -> ModuliPoint:
    rng = random.Random(seed)
    next_gen = 1
    elements = {}
    for e in sk.edge_ids():
        g, next_gen = group.random_element(rng, next_gen)
        elements[e] = g
    return ModuliPoint(sk, group, elements, next_gen)


def identity_point(sk: Skeleton, group) -> ModuliPoint:
    return ModuliPoint(sk, group, {e: group.identity() for e in sk.edge_ids()}, 1)


def holonomy(pt: ModuliPoint, w: Sequence[Letter]):
    return pt.holonomy(w)


# ---------------------------------------------------------------------------
# functions
# ---------------------------------------------------------------------------

ATOM_KINDS = ("tr", "otr", "odet", "logdet", "str", "entry")


@dataclass(frozen=True)
class Inv:
    """``fn(hol(word))``; ``entry`` reads matrix entry ``index`` (block, i, j)."""

    fn: str
    word: Word
    index: Tuple = ()
    label: Hashable = None

    def relabel(self, label) -> "Inv":
        return Inv(self.fn, self.word, self.index, label)

    def transported(self, move) -> "Inv":
        return Inv(self.fn, move.transport(self.word), self.index, self.label)

    def __str__(self):
        from .loops import format_word

        w = format_word(self.word).replace(" ", ".")
        if self.fn == "entry":
            return f"entry[{','.join(map(str, self.index))}]({w})"
        return f"{self.fn}({w})"


def _logdet_series(m) -> Grassmann:
    """``log det(M) - log det(body M)`` for a GL point with nilpotent part."""
    n = m.n
    body = [[x.body() for x in row] for row in m.M]
    binv = SuperMatrix(m.parities, rational_inverse(body))
    z = binv * (m - SuperMatrix(m.parities, body))
    out = Grassmann()
    power = z
    k = 1
    while not power.is_zero():
        tr = mtrace(power)
        out = out + tr * Fraction((-1) ** (k + 1), k)
        power = power * z
        k += 1
    return out


def atom_value(atom: Inv, pt: ModuliPoint) -> Grassmann:
    g = pt.holonomy(atom.word, atom.label)
    fn = atom.fn
    if fn == "tr":
        return qtrace(g) if isinstance(g, QElement) else mtrace(g)
    if fn == "otr":
        return otr(g)
    if fn == "odet":
        return odet(g)
    if fn == "str":
        return supertrace(g)
    if fn == "entry":
        if isinstance(g, QElement):
            block, i, j = atom.index
            return (g.X if block in ("x", "X", 0) else g.Y)[i][j]
        i, j = atom.index[-2:]
        return g.M[i][j]
    if fn == "logdet":
        if pt.depth == 0 or not isinstance(g, SuperMatrix):
            raise LogdetNotEvaluable("logdet can only be differentiated")
        return _logdet_series(g)
    raise ValueError(f"unknown atom {fn!r}")


@dataclass(frozen=True)
class ChordAtom:
    """A chord between two points of a path system.

    ``paths`` are the atoms the chord acts on.  The chord joins split
    ``start[1]`` of ``paths[start[0]]`` to split ``end[1]`` of
    ``paths[end[0]]`` along ``word`` (a path from the start vertex to the end
    vertex).  ``orientation`` -1 means the chord is directed the other way,
    which is the same as swapping the ends and inverting ``word``.
    """

    paths: Tuple[Inv, ...]
    start: Tuple[int, int]
    end: Tuple[int, int]
    word: Word = ()
    orientation: int = 1

    def reversed(self) -> "ChordAtom":
        return ChordAtom(self.paths, self.start, self.end, self.word, -self.orientation)

    def directed(self) -> Tuple[Tuple[int, int], Tuple[int, int], Word]:
        """``(from, to, word)`` following the orientation."""
        if self.orientation > 0:
            return self.start, self.end, self.word
        return self.end, self.start, invert_word(self.word)

    def __str__(self):
        from .loops import format_word

        inner = " * ".join(str(p) for p in self.paths)
        via = format_word(self.word).replace(" ", ".") if self.word else ""
        s = f"chord({self.start[0] + 1}@{self.start[1]} -> {self.end[0] + 1}@{self.end[1]}"
        return f"{'-' if self.orientation < 0 else ''}{s}{' via ' + via if via else ''})[{inner}]"


Atom = Union[Inv, ChordAtom]


@dataclass(frozen=True)
class ModuliFunction:
    """A product of atoms, with a rational coefficient."""

    atoms: Tuple[Atom, ...]
    coeff: Fraction = Fraction(1)

    def __str__(self):
        body = " * ".join(str(a) for a in self.atoms) or "1"
        return body if self.coeff == 1 else f"{self.coeff} * {body}"

    def __call__(self, pt: ModuliPoint) -> Grassmann:
        return evaluate(self, pt)

    def transported(self, move) -> "ModuliFunction":
        atoms = []
        for a in self.atoms:
            if isinstance(a, Inv):
                atoms.append(a.transported(move))
            else:
                atoms.append(
                    ChordAtom(tuple(p.transported(move) for p in a.paths), a.start, a.end, move.transport(a.word), a.orientation)
                )
        return ModuliFunction(tuple(atoms), self.coeff)


@dataclass(frozen=True)
class FunctionSum:
    """A rational linear combination of :class:`ModuliFunction` products."""

    terms: Tuple[Tuple[Fraction, ModuliFunction], ...] = ()

    def __call__(self, pt: ModuliPoint) -> Grassmann:
        out = Grassmann()
        for c, f in self.terms:
            out = out + evaluate(f, pt) * c
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c} * ({f})" if c != 1 else f"({f})" for c, f in self.terms)

    def transported(self, move) -> "FunctionSum":
        return FunctionSum(tuple((c, f.transported(move)) for c, f in self.terms))


def function(*atoms: Atom, coeff=1) -> ModuliFunction:
    return ModuliFunction(tuple(atoms), Fraction(coeff))


def evaluate(f, pt: ModuliPoint) -> Grassmann:
    """Value of a function (or callable) at a point."""
    if not isinstance(f, ModuliFunction):
        return f(pt)
    if pt.depth == 0 and any(isinstance(a, Inv) and a.fn == "logdet" for a in f.atoms):
        raise LogdetNotEvaluable("logdet can only be differentiated")
    if len(f.atoms) > 1 and any(isinstance(a, Inv) and a.fn == "logdet" for a in f.atoms):
        raise LogdetNotEvaluable("logdet must be the only factor of a function")
    out = Grassmann.scalar(f.coeff)
    for a in f.atoms:
        if isinstance(a, Inv):
            v = atom_value(a, pt)
        else:
            v = chord_value(a, pt)
        out = out * v
        if not out.terms:
            break
    return out


eval_function = evaluate


def product_of(atoms: Sequence[Inv]) -> Callable[[ModuliPoint], Grassmann]:
    def F(pt: ModuliPoint) -> Grassmann:
        out = ONE
        for a in atoms:
            out = out * atom_value(a, pt)
            if not out.terms:
                break
        return out

    return F


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Op:
    """First-order operator ``Σ_targets (vec)_target``.

    Targets are half-edge ids, or ``(label, split)`` pairs meaning insertion
    of ``vec`` into a labelled word (the left-invariant derivative on the part
    walked after the split).  ``conj`` optionally conjugates the inserted
    element by a group element.
    """

    targets: Tuple
    vec: Tuple[Tuple[int, Fraction], ...]
    conj: object = None

    @staticmethod
    def make(targets, vec: Vector, conj=None) -> "Op":
        return Op(tuple(targets), tuple(sorted((k, Fraction(v)) for k, v in vec.items() if v)), conj)


def _vec_parity(lie, vec) -> int:
    return lie.vector_parity(dict(vec))


def _tagged(lie, vec, tag: Grassmann, conj=None):
    x = lie.element({i: tag * c for i, c in vec})
    if conj is not None:
        x = conj * x * conj.inverse()
    return x


def perturb(pt: ModuliPoint, ops: Sequence[Op]) -> Tuple[ModuliPoint, List[int]]:
    """Apply operators (outermost first) with fresh tags.

    Returns the perturbed point and the generator sequence whose left
    coefficient gives the value of the composed operator.
    """
    lie = pt.lie
    sk = pt.skeleton
    gen = pt.next_gen
    elements = dict(pt.elements)
    inverses: Dict[str, object] = {}
    insertions = dict(pt.insertions)
    tags: List[Tuple[int, ...]] = []
    for op in ops:
        if not op.vec:
            return None, []
        if _vec_parity(lie, op.vec):
            tag_gens = (gen,)
            gen += 1
        else:
            tag_gens = (gen, gen + 1)
            gen += 2
        tags.append(tag_gens)
        tag = Grassmann.monomial(tag_gens)
        x = _tagged(lie, op.vec, tag, op.conj)
        one = pt.group.identity()
        for target in op.targets:
            if isinstance(target, str):
                # x squares to zero, so the inverse needs one product
                he = sk.half_edge(target)
                e = he.edge
                g = elements[e]
                ginv = inverses[e] if e in inverses else pt.inverse_of(e)
                if he.end == "head":
                    elements[e] = (one - x) * g
                    inverses[e] = ginv * (one + x)
                else:
                    elements[e] = g * (one + x)
                    inverses[e] = (one - x) * ginv
            else:
                insertions[target] = insertions.get(target, ()) + (one + x,)
    seq: List[int] = []
    for t in reversed(tags):
        seq.extend(t)
    for e in elements:
        if e not in inverses and e in pt._inverse:
            inverses[e] = pt._inverse[e]
    return pt.with_elements(elements, gen, insertions, inverses), seq


def derivative(F, pt: ModuliPoint, ops: Sequence[Op]) -> Grassmann:
    """Apply the composite operator ``ops[0] ∘ ops[1] ∘ …`` to ``F`` at ``pt``."""
    q, seq = perturb(pt, ops)
    if q is None:
        return Grassmann()
    value = evaluate(F, q)
    return value.left_coefficient(seq)


def derive(f, pt: ModuliPoint, half_edge: str, direction: Union[int, Vector]) -> Grassmann:
    vec = {direction: 1} if isinstance(direction, int) else direction
    return derivative(f, pt, [Op.make((half_edge,), vec)])


def basis_vec(i: int, c=1) -> Vector:
    return {i: Fraction(c)}


# ---------------------------------------------------------------------------
# chords
# ---------------------------------------------------------------------------

_chord_labels = itertools.count()


def _t_rows(lie: OddMetricLieData) -> List[Tuple[int, Vector]]:
    rows: Dict[int, Vector] = {}
    for i, j, c in lie.t_pairs:
        rows.setdefault(i, {})[j] = c
    return sorted(rows.items())


def chord_value(chord: ChordAtom, pt: ModuliPoint) -> Grassmann:
    """Insert ``(-1)^{|e_i|} t^{ij} e_i ⊗ Ad_{hol δ} e_j`` at the chord ends."""
    base = ("chord", next(_chord_labels))
    paths = [p.relabel((base, k)) for k, p in enumerate(chord.paths)]
    F = product_of(paths)
    src, dst, word = chord.directed()
    conj = pt.holonomy(word) if word else None
    start = ((base, src[0]), src[1])
    end = ((base, dst[0]), dst[1])
    out = Grassmann()
    for i, row in _t_rows(pt.lie):
        out = out + derivative(F, pt, [Op((start,), ((i, Fraction(1)),)), Op((end,), tuple(sorted(row.items())), conj)])
    return out


# ---------------------------------------------------------------------------
# the operators
# ---------------------------------------------------------------------------


def fr_gradient(f, pt: ModuliPoint) -> Dict[Tuple[str, int], Grassmann]:
    lie = pt.lie
    grad = {}
    for _, hs in pt.skeleton.vertices:
        for a in hs:
            for i in range(lie.dim):
                grad[(a, i)] = derivative(f, pt, [Op.make((a,), {i: 1})])
    return grad


def fock_rosly_bracket(f, g, pt: ModuliPoint) -> Grassmann:
    """``{f, g}`` for the bivector ``Σ_p Σ_{a<b} ½ s^{ij} (e_i)_a ∧ (e_j)_b``."""
    lie = pt.lie
    gf = fr_gradient(f, pt)
    gg = fr_gradient(g, pt)
    out = Grassmann()
    half = Fraction(1, 2)
    for _, hs in pt.skeleton.vertices:
        for ia, a in enumerate(hs):
            for b in hs[ia + 1:]:
                for i, j, s in lie.s_pairs:
                    term = gf[(a, i)] * gg[(b, j)] - gf[(b, j)] * gg[(a, i)]
                    out = out + term * (half * s)
    return out


def fr_bracket_function(f, g) -> Callable[[ModuliPoint], Grassmann]:
    return lambda pt: fock_rosly_bracket(f, g, pt)


def quasi_bv_delta(f, pt: ModuliPoint) -> Grassmann:
    """The second-order operator Δ built from the odd pairing and rotations."""
    lie = pt.lie
    sk = pt.skeleton
    half = Fraction(1, 2)
    out = Grassmann()
    rows = _t_rows(lie)
    for _, hs in sk.vertices:
        for ia, a in enumerate(hs):
            later = hs[ia + 1:]
            if not later:
                continue
            for i, row in rows:
                out = out + derivative(f, pt, [Op.make((a,), {i: 1}), Op.make(tuple(later), row)]) * half
    nu = lie.nu_vector()
    if nu:
        for e in sk.edges:
            if e.rot2:
                out = out + derivative(f, pt, [Op.make((e.tail,), nu)]) * Fraction(e.rot2, 4)
    return out


def delta_function(f) -> Callable[[ModuliPoint], Grassmann]:
    return lambda pt: quasi_bv_delta(f, pt)


def rho_op(sk: Skeleton, vertex: str, vec: Vector) -> Op:
    return Op.make(tuple(sk.half_edges_at(vertex)), vec)


def phi_action(f, pt: ModuliPoint, vertex: str, phi: Optional[Dict] = None) -> Grassmann:
    """``ρ_p(φ) f`` with ``φ = φ^{xyz} e_x e_y e_z`` (``e_x`` acts last)."""
    lie = pt.lie
    phi = lie.phi if phi is None else phi
    grouped: Dict[Tuple[int, int], Vector] = {}
    for (x, y, z), c in phi.items():
        grouped.setdefault((x, y), {})[z] = c
    sk = pt.skeleton
    out = Grassmann()
    for (x, y), vec in sorted(grouped.items()):
        out = out + derivative(f, pt, [rho_op(sk, vertex, {x: 1}), rho_op(sk, vertex, {y: 1}), rho_op(sk, vertex, vec)])
    return out


def total_phi_action(f, pt: ModuliPoint, phi: Optional[Dict] = None) -> Grassmann:
    out = Grassmann()
    for v in pt.skeleton.vertex_ids():
        out = out + phi_action(f, pt, v, phi)
    return out


def trivector_action(f, g, h, pt: ModuliPoint, vertex: str, tensor: Dict[Tuple[int, int, int], Fraction]) -> Grassmann:
    """``Σ c^{ijk} (ρ e_i ∧ ρ e_j ∧ ρ e_k)(df, dg, dh)`` (determinant pairing)."""
    sk = pt.skeleton
    lie = pt.lie
    ders = {}
    for i in range(lie.dim):
        op = rho_op(sk, vertex, {i: 1})
        ders[i] = tuple(derivative(u, pt, [op]) for u in (f, g, h))
    out = Grassmann()
    for (i, j, k), c in tensor.items():
        a, b, d = ders[i], ders[j], ders[k]
        det = (
            a[0] * (b[1] * d[2] - b[2] * d[1])
            - a[1] * (b[0] * d[2] - b[2] * d[0])
            + a[2] * (b[0] * d[1] - b[1] * d[0])
        )
        out = out + det * c
    return out


def jacobiator(f, g, h, pt: ModuliPoint) -> Grassmann:
    return (
        fock_rosly_bracket(f, fr_bracket_function(g, h), pt)
        + fock_rosly_bracket(g, fr_bracket_function(h, f), pt)
        + fock_rosly_bracket(h, fr_bracket_function(f, g), pt)
    )


def even_phi_trivector(f, g, h, pt: ModuliPoint) -> Grassmann:
    """``Σ_p ρ_p(φ)(df, dg, dh)`` for the even Cartan trivector."""
    out = Grassmann()
    for v in pt.skeleton.vertex_ids():
        out = out + trivector_action(f, g, h, pt, v, pt.lie.phi)
    return out


# ---------------------------------------------------------------------------
# intersection formula
# ---------------------------------------------------------------------------


def system_function(atoms: Sequence[Inv]) -> Tuple[List[Inv], Callable]:
    labelled = [a.relabel(k) for k, a in enumerate(atoms)]
    return labelled, product_of(labelled)


def intersection_delta_rhs(diagram: LoopDiagram, atoms: Sequence[Inv], pt: ModuliPoint) -> Grassmann:
    """Sum over crossings of weighted chord terms plus the rotation term.

    ``atoms[k]`` is the function applied to item ``k`` of the diagram (its
    word must equal the item's word).
    """
    for k, a in enumerate(atoms):
        if tuple(a.word) != tuple(diagram.items[k][0]):
            raise ValueError(f"atom {k} does not match diagram item {k}")
    _, F = system_function(atoms)
    lie = pt.lie
    rows = _t_rows(lie)
    out = Grassmann()
    for c in crossings(diagram):
        a, b = c.first, c.second
        val = Grassmann()
        for i, row in rows:
            val = val + derivative(F, pt, [Op(((a.item, a.split),), ((i, Fraction(1)),)), Op.make(((b.item, b.split),), row)])
        out = out + val * (c.weight * c.sign)
    nu = lie.nu_vector()
    if nu:
        for k, (w, closed) in enumerate(diagram.items):
            r2 = diagram.rotation2(k)
            if r2:
                out = out + derivative(F, pt, [Op.make(((k, len(w)),), nu)]) * Fraction(r2, 4)
    return out


def system_delta_lhs(atoms: Sequence[Inv], pt: ModuliPoint) -> Grassmann:
    _, F = system_function(atoms)
    return quasi_bv_delta(F, pt)


# ---------------------------------------------------------------------------
# fusion
# ---------------------------------------------------------------------------


def fusion_cross_term(f, pt: ModuliPoint, p1: str, p2: str) -> Grassmann:
    """``½ (-1)^{|e_i|} t^{ij} ρ_{p1}(e_i) ρ_{p2}(e_j) f`` on the unfused skeleton."""
    sk = pt.skeleton
    out = Grassmann()
    for i, row in _t_rows(pt.lie):
        out = out + derivative(f, pt, [rho_op(sk, p1, {i: 1}), rho_op(sk, p2, row)])
    return out * Fraction(1, 2)


def fused_delta(f, pt: ModuliPoint, p1: str, p2: str) -> Grassmann:
    return quasi_bv_delta(f, pt) + fusion_cross_term(f, pt, p1, p2)


def fusion_cross_bracket(f, g, pt: ModuliPoint, p1: str, p2: str) -> Grassmann:
    """``½ s^{ij} ρ_{p1}(e_i) ∧ ρ_{p2}(e_j)`` applied to ``(df, dg)``."""
    sk = pt.skeleton
    lie = pt.lie
    out = Grassmann()
    for i, j, s in lie.s_pairs:
        o1 = rho_op(sk, p1, {i: 1})
        o2 = rho_op(sk, p2, {j: 1})
        term = derivative(f, pt, [o1]) * derivative(g, pt, [o2]) - derivative(f, pt, [o2]) * derivative(g, pt, [o1])
        out = out + term * (s / 2)
    return out


def fused_bracket(f, g, pt: ModuliPoint, p1: str, p2: str) -> Grassmann:
    return fock_rosly_bracket(f, g, pt) + fusion_cross_bracket(f, g, pt, p1, p2)


def on_skeleton(pt: ModuliPoint, sk: Skeleton) -> ModuliPoint:
    """Same edge elements viewed on another skeleton with the same edges."""
    return ModuliPoint(sk, pt.group, pt.elements, pt.next_gen)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_ATOM_RE = re.compile(
    r"\s*(?:(?P<fn>tr|otr|odet|logdet|str)\s*\((?P<w>[^()]*)\)"
    r"|entry\s*\[(?P<idx>[^\]]*)\]\s*\((?P<ew>[^()]*)\)"
    r"|chord\s*\(\s*(?P<k1>\d+)\s*@\s*(?P<s1>\d+)\s*->\s*(?P<k2>\d+)\s*@\s*(?P<s2>\d+)\s*(?:via\s+(?P<via>[^()]*))?\))\s*"
)


def parse_function(text: str, sk: Skeleton) -> ModuliFunction:
    """Parse ``tr(a.b) * otr(b') * chord(1@2 -> 2@0 via a)``.

    Chord atoms refer to the plain atoms of the same product by 1-based
    position; the referenced atoms become the chord's paths.
    """
    pieces = []
    pos = 0
    text = text.strip()
    if text in ("", "1"):
        return function()
    while pos < len(text):
        m = _ATOM_RE.match(text, pos)
        if not m:
            raise ParseError(f"cannot parse atom in {text!r}", pos)
        pieces.append(m)
        pos = m.end()
        if pos < len(text):
            if text[pos] != "*":
                raise ParseError("expected '*' between atoms", pos)
            pos += 1
    plain: List[Inv] = []
    chords = []
    for m in pieces:
        if m.group("fn"):
            plain.append(Inv(m.group("fn"), parse_word(m.group("w"), sk)))
        elif m.group("ew") is not None:
            idx = tuple(p.strip() for p in m.group("idx").split(","))
            idx = tuple(int(p) if p.lstrip("-").isdigit() else p for p in idx)
            plain.append(Inv("entry", parse_word(m.group("ew"), sk), idx))
        else:
            chords.append(m)
    used = set()
    atoms: List[Atom] = []
    for m in chords:
        k1, k2 = int(m.group("k1")) - 1, int(m.group("k2")) - 1
        if not (0 <= k1 < len(plain) and 0 <= k2 < len(plain)):
            raise ParseError("chord refers to a missing atom", m.start())
        refs = sorted({k1, k2})
        paths = tuple(plain[k] for k in refs)
        local = {k: i for i, k in enumerate(refs)}
        via = parse_word(m.group("via") or "", sk)
        atoms.append(ChordAtom(paths, (local[k1], int(m.group("s1"))), (local[k2], int(m.group("s2"))), via))
        used.update(refs)
    atoms = [a for k, a in enumerate(plain) if k not in used] + atoms
    for a in atoms:
        for p in (a.paths if isinstance(a, ChordAtom) else (a,)):
            sk.check_path(p.word)
    return ModuliFunction(tuple(atoms))
