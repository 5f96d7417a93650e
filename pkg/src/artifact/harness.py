"""Randomized exact verification suites.

Every suite draws its inputs from a seeded generator, checks one family of
identities with exact arithmetic, and records a verdict per trial.  Trial
``i`` uses seed ``cfg.seed + i``, so any failure replays from its report.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import ProperPowerUnsupported, UnknownSuite
from .loops import (
    CIRCLE,
    CyclicWord,
    FormalSum,
    HBasis,
    adjoint_on_wedge,
    as_sum,
    basis_loop,
    bv_delta_wedge,
    canonicalize,
    crossings,
    extended_bracket,
    format_word,
    goldman_bracket,
    h1_edges,
    homology_class,
    intersection_pairing_h1,
    is_proper_power,
    realize,
    single,
    transport_element,
    turaev_cobracket,
    wedge_sum,
)
from .modulispace import (
    ChordAtom,
    DoubleGroup,
    FunctionSum,
    GLGroup,
    Inv,
    ModuliFunction,
    Op,
    QGroup,
    _t_rows,
    delta_function,
    derivative,
    even_phi_trivector,
    evaluate,
    fock_rosly_bracket,
    function,
    fused_bracket,
    fused_delta,
    intersection_delta_rhs,
    jacobiator,
    on_skeleton,
    quasi_bv_delta,
    random_point,
    system_delta_lhs,
    total_phi_action,
)
from .superalgebra import (
    Grassmann,
    QElement,
    aff1,
    build_gln,
    build_qn,
    odd_double,
    odet,
    otr,
    rational_inverse,
)
from .surface import Skeleton, builtin, fuse, reverse_edge, slide, slide_options

SUITES = (
    "GT_AXIOMS",
    "REALIZATION",
    "GOLDMAN_EVEN",
    "FR_INVARIANCE",
    "FR_QUASI",
    "BV_INVARIANCE",
    "BV_SQUARE",
    "GEOMETRIC_BV",
    "ODD_GOLDMAN",
    "ODD_GOLDMAN_EXT",
    "ALGEBRA_IDS",
    "FUSION",
)


@dataclass
class SuiteConfig:
    suite: str
    surface: str = "torus"
    group: Optional[str] = None
    n: Optional[int] = None
    trials: int = 25
    max_length: int = 5
    seed: int = 0

    def __post_init__(self):
        self.suite = self.suite.upper()
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass
class TrialResult:
    seed: int
    verdict: str
    counterexample: Optional[dict] = None
    info: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"seed": self.seed, "verdict": self.verdict, "counterexample": self.counterexample}


@dataclass
class Report:
    suite: str
    trials: List[TrialResult]
    elapsed_ms: int

    @property
    def passed(self) -> bool:
        return all(t.verdict == "PASS" for t in self.trials)

    def first_failure(self) -> Optional[TrialResult]:
        for t in self.trials:
            if t.verdict != "PASS":
                return t
        return None

    def to_json(self) -> dict:
        return {"suite": self.suite, "trials": [t.to_json() for t in self.trials], "elapsed_ms": self.elapsed_ms}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)


class _Mismatch(Exception):
    def __init__(self, check: str, **data):
        super().__init__(check)
        self.payload = {"check": check, **{k: str(v) for k, v in data.items()}}


def _expect(ok: bool, check: str, **data) -> None:
    if not ok:
        raise _Mismatch(check, **data)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _letters_from(sk: Skeleton, vertex: str) -> List[Tuple[str, int]]:
    out = []
    for e in sk.edges:
        if sk.half_edge(e.tail).vertex == vertex:
            out.append((e.id, 1))
        if sk.half_edge(e.head).vertex == vertex:
            out.append((e.id, -1))
    return out


def random_path(sk: Skeleton, rng: random.Random, max_length: int, start: Optional[str] = None) -> Tuple:
    """A reduced composable word of length 1..max_length."""
    length = rng.randint(1, max(1, max_length))
    v = start if start is not None else rng.choice(sk.vertex_ids())
    walked: List[Tuple[str, int]] = []
    for _ in range(length):
        options = [l for l in _letters_from(sk, v) if not (walked and l == (walked[-1][0], -walked[-1][1]))]
        if not options:
            break
        letter = rng.choice(options)
        walked.append(letter)
        v = sk.end_vertex(letter)
    # words list the first traversed letter last
    return tuple(reversed(walked))


def random_loop(sk: Skeleton, rng: random.Random, max_length: int, attempts: int = 2000) -> CyclicWord:
    """A primitive, nontrivial loop class of length at most ``max_length``."""
    for _ in range(attempts):
        w = random_path(sk, rng, max_length)
        if sk.start_vertex(w[-1]) != sk.end_vertex(w[0]):
            continue
        c = canonicalize(w, sk)
        if c.is_trivial() or is_proper_power(c) or len(c.letters) > max_length:
            continue
        return c
    raise RuntimeError("could not sample a loop")


def _distinct_loops(sk, rng, k, max_length) -> List[CyclicWord]:
    out: List[CyclicWord] = []
    while len(out) < k:
        c = random_loop(sk, rng, max_length)
        if c not in out:
            out.append(c)
    return out


def _prefer(sample: Callable[[], object], good: Callable[[object], bool], tries: int = 40):
    """Re-sample until ``good`` holds, keeping the last draw if it never does."""
    x = sample()
    for _ in range(tries):
        if good(x):
            break
        x = sample()
    return x


def _random_rotations(sk: Skeleton, rng: random.Random, spread: int = 3) -> Skeleton:
    return sk.with_rotations({e: rng.randint(-spread, spread) for e in sk.edge_ids()})


def _random_moves(sk: Skeleton, rng: random.Random, count: int):
    moves = []
    cur = sk
    for _ in range(count):
        if rng.random() < 0.3:
            cur, mv = reverse_edge(cur, rng.choice(cur.edge_ids()))
        else:
            cur, mv = slide(cur, *rng.choice(slide_options(cur)))
        moves.append(mv)
    return moves


def _longest_transport(f: ModuliFunction, moves) -> int:
    longest = max((len(a.word) for a in f.atoms), default=0)
    for mv in moves:
        f = f.transported(mv)
        longest = max([longest] + [len(a.word) for a in f.atoms])
    return longest


def _entry_atom(sk: Skeleton, rng: random.Random, group, max_length: int) -> Inv:
    w = random_path(sk, rng, max_length)
    if group.kind == "q":
        idx = (rng.choice("xy"), rng.randrange(group.n), rng.randrange(group.n))
    elif group.kind == "double":
        m = group.n
        idx = ("m", rng.randrange(m), rng.choice([m - 1, rng.randrange(m)]))
    else:
        idx = ("m", rng.randrange(group.n), rng.randrange(group.n))
    return Inv("entry", w, idx)


def _entry_function(sk, rng, group, atoms: int, max_length: int) -> ModuliFunction:
    return function(*[_entry_atom(sk, rng, group, max_length) for _ in range(atoms)])


def _make_group(kind: str, n: int):
    if kind == "gl":
        return GLGroup(n)
    if kind == "q":
        return QGroup(n)
    if kind == "double":
        return DoubleGroup()
    raise ValueError(f"unknown group {kind!r}")


def _surface(name: str) -> Skeleton:
    return builtin(name)


# ---------------------------------------------------------------------------
# composite maps
# ---------------------------------------------------------------------------


def _h1_word(sk: Skeleton, key: HBasis):
    return basis_loop(sk, key.index).letters


def phi_even(x, n: int, sk: Skeleton) -> FunctionSum:
    """Loop classes to traces, H₁ basis classes to logdet atoms."""
    terms = []
    for key, c in as_sum(x).items():
        if isinstance(key, CyclicWord):
            if key.is_trivial():
                terms.append((Fraction(c), function(coeff=n)))
            else:
                terms.append((Fraction(c), function(Inv("tr", key.letters))))
        elif isinstance(key, HBasis):
            terms.append((Fraction(c), function(Inv("logdet", _h1_word(sk, key)))))
        else:
            raise TypeError("phi_even takes loop classes and H1 classes")
    return FunctionSum(tuple(terms))


def phi_odd(X, sk: Skeleton) -> FunctionSum:
    """Wedge monomials to ordered products of otr (loops) and odet (H₁) atoms."""
    terms = []
    for key, c in as_sum(X).items():
        gens = key if isinstance(key, tuple) else (key,)
        atoms = []
        for g in gens:
            if isinstance(g, CyclicWord):
                if g.is_trivial():
                    atoms = None
                    break
                atoms.append(Inv("otr", g.letters))
            else:
                atoms.append(Inv("odet", _h1_word(sk, g)))
        if atoms is not None:
            terms.append((Fraction(c), function(*atoms)))
    return FunctionSum(tuple(terms))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _trial_gt_axioms(cfg: SuiteConfig, seed: int) -> dict:
    sk = _surface(cfg.surface)
    rng = random.Random(seed)
    L = cfg.max_length
    # alternate trials insist on self-intersection so co-Jacobi is not vacuous
    x = _prefer(lambda: random_loop(sk, rng, L), lambda c: seed % 2 == 1 or bool(turaev_cobracket(sk, c)))
    y, z = random_loop(sk, rng, L), random_loop(sk, rng, L)
    xy = goldman_bracket(sk, x, y)
    _expect(xy == goldman_bracket(sk, y, x).scale(-1), "antisymmetry", x=x, y=y)
    jac = (
        goldman_bracket(sk, x, goldman_bracket(sk, y, z))
        + goldman_bracket(sk, y, goldman_bracket(sk, z, x))
        + goldman_bracket(sk, z, goldman_bracket(sk, x, y))
    )
    _expect(jac.is_zero(), "jacobi", x=x, y=y, z=z)
    dx = turaev_cobracket(sk, x)
    dy = turaev_cobracket(sk, y)
    cojac = FormalSum()
    for (u, v), c in dx.items():
        cojac = cojac + wedge_sum(turaev_cobracket(sk, u), single(v)).scale(c)
        cojac = cojac - wedge_sum(single(u), turaev_cobracket(sk, v)).scale(c)
    _expect(cojac.is_zero(), "co-jacobi", x=x)
    lhs = turaev_cobracket(sk, goldman_bracket(sk, x, y, keep_circle=False))
    rhs = adjoint_on_wedge(sk, x, dy) - adjoint_on_wedge(sk, y, dx)
    _expect(lhs == rhs, "cocycle", x=x, y=y)
    inv = FormalSum()
    for (u, v), c in dx.items():
        inv = inv + goldman_bracket(sk, u, v, keep_circle=False).scale(c)
    _expect(inv.is_zero(), "involutivity", x=x)
    W = wedge_sum(single(x), single(y), single(z))
    D2 = bv_delta_wedge(sk, bv_delta_wedge(sk, W, 2), 2)
    _expect(D2.is_zero(), "bv square", x=x, y=y, z=z)
    return {"cobracket_nonzero": bool(dx), "bracket_nonzero": bool(xy)}


def _trial_realization(cfg: SuiteConfig, seed: int) -> dict:
    sk = _surface(cfg.surface)
    rng = random.Random(seed)
    x, y = random_loop(sk, rng, cfg.max_length), random_loop(sk, rng, cfg.max_length)
    br = goldman_bracket(sk, x, y)
    co = turaev_cobracket(sk, x)
    for s in range(1, 9):
        _expect(goldman_bracket(sk, x, y, seed=s) == br, "bracket seed", x=x, y=y, realization=s)
        _expect(turaev_cobracket(sk, x, seed=s) == co, "cobracket seed", x=x, realization=s)
    cur, cx, cy, cbr, cco = sk, x, y, br, co
    for mv in _random_moves(sk, rng, 3):
        cur = mv.target
        cx = canonicalize(mv.transport(cx.letters), cur)
        cy = canonicalize(mv.transport(cy.letters), cur)
        cbr = transport_element(mv, cbr)
        cco = transport_element(mv, cco)
        _expect(goldman_bracket(cur, cx, cy) == cbr, "bracket move", x=x, y=y, skeleton=cur.dumps())
        _expect(turaev_cobracket(cur, cx) == cco, "cobracket move", x=x, skeleton=cur.dumps())
    return {}


def _trial_goldman_even(cfg: SuiteConfig, seed: int) -> dict:
    sk = _surface(cfg.surface)
    n = cfg.n or 2
    group = GLGroup(n)
    rng = random.Random(seed)
    pt = random_point(sk, group, seed)
    x, y = _prefer(
        lambda: (random_loop(sk, rng, cfg.max_length), random_loop(sk, rng, cfg.max_length)),
        lambda p: bool(goldman_bracket(sk, *p, keep_circle=False)),
    )
    lhs = fock_rosly_bracket(phi_even(x, n, sk), phi_even(y, n, sk), pt)
    rhs = phi_even(goldman_bracket(sk, x, y), n, sk)(pt)
    _expect(lhs == rhs, "trace-trace", x=x, y=y, lhs=lhs, rhs=rhs)
    rank = len(h1_edges(sk))
    info = {"nonzero": not lhs.is_zero()}
    if rank:
        a, b = HBasis(rng.randrange(rank)), HBasis(rng.randrange(rank))
        for u, v, name in ((single(x), single(a), "trace-logdet"), (single(a), single(b), "logdet-logdet")):
            lhs = fock_rosly_bracket(phi_even(u, n, sk), phi_even(v, n, sk), pt)
            rhs = phi_even(extended_bracket(sk, u, v), n, sk)(pt)
            _expect(lhs == rhs, name, u=u, v=v, lhs=lhs, rhs=rhs)
        # explicit pairing form of the two rows
        ha = [int(i == a.index) for i in range(rank)]
        hb = [int(i == b.index) for i in range(rank)]
        pair = intersection_pairing_h1(sk, ha, hb)
        lhs = fock_rosly_bracket(phi_even(a, n, sk), phi_even(b, n, sk), pt)
        _expect(lhs == Grassmann.scalar(pair * n), "logdet pairing", a=a, b=b)
        gx = intersection_pairing_h1(sk, homology_class(sk, x), ha)
        lhs = fock_rosly_bracket(phi_even(x, n, sk), phi_even(a, n, sk), pt)
        _expect(lhs == phi_even(x, n, sk)(pt) * gx, "trace-logdet pairing", x=x, a=a)
        # another representative of the class gives the same derivatives
        u, v = random_loop(sk, rng, 2), random_loop(sk, rng, 2)
        w1 = _h1_word(sk, a)
        comm = tuple(u.letters) + tuple(v.letters) + _inv(u.letters) + _inv(v.letters)
        w2 = _reduce(w1[:0] + w1 + comm) if _closes(sk, w1, comm) else w1
        for he in sk.half_edges_at(sk.vertex_ids()[0]):
            for i in range(group.lie.dim):
                d1 = derivative(function(Inv("logdet", w1)), pt, [Op.make((he,), {i: 1})])
                d2 = derivative(function(Inv("logdet", w2)), pt, [Op.make((he,), {i: 1})])
                _expect(d1 == d2, "logdet representative", a=a, other=format_word(w2))
    return info


def _inv(w):
    from .surface import invert_word

    return invert_word(w)


def _reduce(w):
    from .surface import reduce_word

    return reduce_word(w)


def _closes(sk: Skeleton, w1, comm) -> bool:
    if not comm:
        return False
    try:
        sk.check_path(tuple(w1) + tuple(comm))
        return True
    except Exception:
        return False


def _trial_fr_invariance(cfg: SuiteConfig, seed: int) -> dict:
    sk = _surface(cfg.surface)
    n = cfg.n or 2
    group = GLGroup(n)
    rng = random.Random(seed)
    pt = random_point(sk, group, seed)
    x, y = _prefer(
        lambda: (random_loop(sk, rng, cfg.max_length), random_loop(sk, rng, cfg.max_length)),
        lambda p: bool(goldman_bracket(sk, *p, keep_circle=False)),
    )
    f, g = phi_even(x, n, sk), phi_even(y, n, sk)
    base = fock_rosly_bracket(f, g, pt)
    cur_pt, cur_f, cur_g = pt, f, g
    for mv in _random_moves(sk, rng, 3):
        cur_pt = cur_pt.transport(mv)
        cur_f, cur_g = cur_f.transported(mv), cur_g.transported(mv)
        val = fock_rosly_bracket(cur_f, cur_g, cur_pt)
        _expect(val == base, "move", f=f, g=g, skeleton=mv.target.dumps())
    # fusion of the two vertices of the two-vertex annulus
    an = builtin("annulus2")
    fused = fuse(an, "p", None, "q")
    apt = random_point(an, group, seed)
    u = _entry_function(an, rng, group, 1, 3)
    v = _entry_function(an, rng, group, 1, 3)
    _expect(
        fused_bracket(u, v, apt, "p", "q") == fock_rosly_bracket(u, v, on_skeleton(apt, fused)),
        "fusion",
        f=u,
        g=v,
    )
    return {"nonzero": not base.is_zero()}


def _trial_fr_quasi(cfg: SuiteConfig, seed: int) -> dict:
    sk = _surface(cfg.surface)
    group = GLGroup(cfg.n or 2)
    rng = random.Random(seed)
    pt = random_point(sk, group, seed)
    L = min(cfg.max_length, 3)
    fs = [_entry_function(sk, rng, group, 1, L) for _ in range(3)]
    J = jacobiator(*fs, pt)
    P = even_phi_trivector(*fs, pt)
    _expect(J == P, "jacobiator", f=fs[0], g=fs[1], h=fs[2], lhs=J, rhs=P)
    return {"nonzero": not J.is_zero()}


def _odd_group(cfg: SuiteConfig, default: str = "q"):
    return _make_group(cfg.group or default, cfg.n or 1)


def _trial_bv_invariance(cfg: SuiteConfig, seed: int) -> dict:
    group = _odd_group(cfg)
    rng = random.Random(seed)
    sk = _random_rotations(_surface(cfg.surface), rng)
    pt = random_point(sk, group, seed)
    _expect(quasi_bv_delta(function(), pt).is_zero(), "delta of one")
    # evaluation cost grows steeply with word length for Q(2), so moves that
    # stretch the words too far are re-drawn
    heavy = group.kind == "q" and group.n > 1
    L = min(cfg.max_length, 3 if heavy else 4)
    if group.kind == "q" and rng.random() < 0.5:
        fns = ["otr", "odet"]
        f = function(*[Inv(rng.choice(fns), random_loop(sk, rng, L).letters) for _ in range(2)])
    else:
        f = _entry_function(sk, rng, group, 2, L)
    limit = 5 if heavy else 8
    moves = _prefer(lambda: _random_moves(sk, rng, 3), lambda ms: _longest_transport(f, ms) <= limit)
    base = quasi_bv_delta(f, pt)
    cur_pt, cur_f = pt, f
    for mv in moves:
        cur_pt = cur_pt.transport(mv)
        cur_f = cur_f.transported(mv)
        _expect(evaluate(cur_f, cur_pt) == evaluate(f, pt), "transport")
        val = quasi_bv_delta(cur_f, cur_pt)
        _expect(val == base, "move", f=f, skeleton=mv.target.dumps(), lhs=base, rhs=val)
    return {"nonzero": not base.is_zero()}


def _trial_bv_square(cfg: SuiteConfig, seed: int) -> dict:
    # φ vanishes for q(1), so Q(2) is the default that makes the identity non-vacuous
    group = _make_group(cfg.group or "q", cfg.n or 2)
    rng = random.Random(seed)
    sk = _surface(cfg.surface)
    if group.kind == "double":
        sk = _random_rotations(sk, rng)
    pt = random_point(sk, group, seed)
    L = min(cfg.max_length, 3 if group.n == 1 or group.kind == "double" else 2)
    f = _entry_function(sk, rng, group, 2, L)
    lhs = quasi_bv_delta(delta_function(f), pt)
    rhs = total_phi_action(f, pt)
    _expect(lhs == rhs, "square", f=f, lhs=lhs, rhs=rhs)
    return {"nonzero": not lhs.is_zero()}


def _rii_orders(d):
    """Edge orders with one adjacent swap that adds a bigon, if any."""
    base = len(crossings(d))
    for e, order in sorted(d.strand_order.items()):
        for i in range(len(order) - 1):
            new = {k: list(v) for k, v in d.strand_order.items()}
            new[e][i], new[e][i + 1] = new[e][i + 1], new[e][i]
            yield new, base


def _trial_geometric_bv(cfg: SuiteConfig, seed: int) -> dict:
    group = _odd_group(cfg)
    rng = random.Random(seed)
    sk = _random_rotations(_surface(cfg.surface), rng)
    pt = random_point(sk, group, seed)
    L = min(cfg.max_length, 4)
    items = []
    atoms = []
    use_loops = group.kind == "q" and seed % 2 == 0
    for _ in range(rng.randint(1, 2) if use_loops else 2):
        if use_loops:
            c = random_loop(sk, rng, L)
            items.append(c)
            atoms.append(Inv(rng.choice(["otr", "odet"]), c.letters))
        else:
            a = _entry_atom(sk, rng, group, L)
            items.append((a.word, False))
            atoms.append(a)
    d = realize(sk, items, seed=seed, allow_powers=True)
    lhs = system_delta_lhs(atoms, pt)
    rhs = intersection_delta_rhs(d, atoms, pt)
    _expect(lhs == rhs, "intersection formula", atoms=[str(a) for a in atoms], lhs=lhs, rhs=rhs)
    cs = crossings(d)
    info = {
        "crossings": len(cs),
        "boundary": sum(1 for c in cs if c.location == "boundary"),
        "nonzero": not lhs.is_zero(),
        "rii": False,
    }
    for orders, base in _rii_orders(d):
        d2 = realize(sk, items, edge_orders=orders, allow_powers=True)
        if len(crossings(d2)) == base + 2:
            rhs2 = intersection_delta_rhs(d2, atoms, pt)
            _expect(rhs2 == rhs, "reidemeister II", atoms=[str(a) for a in atoms])
            info["rii"] = True
            break
    return info


def _intersecting_pair(sk, rng, L):
    for _ in range(200):
        x, y = _distinct_loops(sk, rng, 2, L)
        if goldman_bracket(sk, x, y, keep_circle=False):
            return x, y
    return _distinct_loops(sk, rng, 2, L)


def _self_intersecting(sk, rng, L):
    for _ in range(200):
        x = random_loop(sk, rng, L)
        if turaev_cobracket(sk, x):
            return x
    return random_loop(sk, rng, L)


def _trial_odd_goldman(cfg: SuiteConfig, seed: int) -> dict:
    group = QGroup(cfg.n or 1)
    rng = random.Random(seed)
    sk = _surface(cfg.surface)
    pt = random_point(sk, group, seed)
    L = cfg.max_length
    kind = seed % 3
    if kind == 0:
        gens = [_self_intersecting(sk, rng, L)]
    elif kind == 1:
        gens = list(_intersecting_pair(sk, rng, L))
    else:
        gens = _distinct_loops(sk, rng, rng.randint(1, 2), L)
    X = wedge_sum(*[single(g) for g in gens])
    lhs = quasi_bv_delta(phi_odd(X, sk), pt)
    rhs = phi_odd(bv_delta_wedge(sk, X, 2), sk)(pt)
    _expect(lhs == rhs, "bv map", X=X, lhs=lhs, rhs=rhs)
    self_x = any(turaev_cobracket(sk, g) for g in gens)
    mutual = len(gens) == 2 and bool(goldman_bracket(sk, gens[0], gens[1], keep_circle=False))
    return {"self_intersection": bool(self_x), "mutual_intersection": mutual, "nonzero": not lhs.is_zero()}


def _trial_odd_goldman_ext(cfg: SuiteConfig, seed: int) -> dict:
    group = QGroup(cfg.n or 1)
    rng = random.Random(seed)
    sk = _surface(cfg.surface)
    pt = random_point(sk, group, seed)
    rank = len(h1_edges(sk))
    a = HBasis(rng.randrange(rank))
    b = HBasis((a.index + 1) % rank)
    kind = seed % 3
    if kind == 0:
        X = single(a)
    elif kind == 1:
        X = wedge_sum(single(a), single(b)) if a != b else single(a)
    else:
        X = wedge_sum(single(random_loop(sk, rng, cfg.max_length)), single(a))
    lhs = quasi_bv_delta(phi_odd(X, sk), pt)
    rhs = phi_odd(bv_delta_wedge(sk, X, 2), sk)(pt)
    _expect(lhs == rhs, "extended bv map", X=X, lhs=lhs, rhs=rhs)
    if kind < 2:
        _expect(lhs.is_zero(), "vanishing case", X=X)
    return {"case": ["self", "pair", "mixed"][kind], "nonzero": not lhs.is_zero()}


# algebra identities -----------------------------------------------------------


def _mul_consts(q, u: Dict[int, Fraction], v: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for i, a in u.items():
        for j, b in v.items():
            for k, c in q.assoc.get((i, j), {}).items():
                out[k] = out.get(k, Fraction(0)) + a * b * c
    return {k: c for k, c in out.items() if c}


def check_discardy(q) -> bool:
    """``-½ (-1)^{|e_a|+|e_b||e_i|} t^{ab} c^j_{aib} = t_i u^j`` for all i, j."""
    P = q.parity
    for i in range(q.dim):
        lhs: Dict[int, Fraction] = {}
        for a in range(q.dim):
            for b in range(q.dim):
                tab = q.tinv[a][b]
                if not tab:
                    continue
                sign = -1 if (P[a] + P[b] * P[i]) % 2 else 1
                for j, c in _mul_consts(q, _mul_consts(q, {a: 1}, {i: 1}), {b: 1}).items():
                    lhs[j] = lhs.get(j, Fraction(0)) - Fraction(1, 2) * sign * tab * c
        lhs = {k: v for k, v in lhs.items() if v}
        rhs = {j: q.otr_coeffs[i] * u for j, u in enumerate(q.unit) if q.otr_coeffs[i] * u}
        if lhs != rhs:
            return False
    return True


def check_matrix_units(n: int, X: Sequence[Sequence[Fraction]]) -> bool:
    """``Σ S^{ab} E_a X E_b = Tr(X) 1`` with ``S`` inverse to ``Tr(E_a E_b)``."""
    units = [(a, b) for a in range(n) for b in range(n)]
    gram = [[Fraction(int(u[1] == v[0] and u[0] == v[1])) for v in units] for u in units]
    S = rational_inverse(gram)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i, (a1, b1) in enumerate(units):
        for j, (a2, b2) in enumerate(units):
            if S[i][j]:
                # E_{a1 b1} X E_{a2 b2} has X_{b1 a2} at (a1, b2)
                out[a1][b2] += S[i][j] * X[b1][a2]
    tr = sum((X[i][i] for i in range(n)), Fraction(0))
    return all(out[i][j] == (tr if i == j else 0) for i in range(n) for j in range(n))


def check_metric_tensors(lie) -> List[str]:
    """Coordinate identities of an odd metric Lie superalgebra; returns failures."""
    bad = []
    d = lie.dim
    P = lie.parity

    def f(i, j):
        return lie.f.get((i, j), {})

    for i in range(d):
        for j in range(d):
            s = -((-1) ** (P[i] * P[j]))
            if {k: s * c for k, c in f(j, i).items()} != f(i, j):
                bad.append("antisymmetry")
                break
    for x in range(d):
        for y in range(d):
            for z in range(d):
                tot: Dict[int, Fraction] = {}

                def acc(vec, c):
                    for k, v in vec.items():
                        tot[k] = tot.get(k, Fraction(0)) + c * v

                acc(lie.bracket({x: 1}, lie.bracket({y: 1}, {z: 1})), 1)
                acc(lie.bracket(lie.bracket({x: 1}, {y: 1}), {z: 1}), -1)
                acc(lie.bracket({y: 1}, lie.bracket({x: 1}, {z: 1})), -((-1) ** (P[x] * P[y])))
                if any(tot.values()):
                    bad.append("jacobi")
                    break
    for i in range(d):
        for j in range(d):
            if lie.t[i][j] and P[i] == P[j]:
                bad.append("pairing parity")
            if lie.t[i][j] != (-1) ** (P[i] * P[j]) * lie.t[j][i]:
                bad.append("pairing symmetry")
    for x in range(d):
        for y in range(d):
            for z in range(d):
                lhs = lie.pairing(lie.bracket({x: 1}, {y: 1}), {z: 1})
                lhs += (-1) ** (P[x] * P[y]) * lie.pairing({y: 1}, lie.bracket({x: 1}, {z: 1}))
                if lhs:
                    bad.append("pairing invariance")
    # invariance of (-1)^{|e_i|} t^{ij} e_i ∧ e_j
    for x in range(d):
        tot: Dict[Tuple[int, int], Fraction] = {}
        for i, j, c in lie.t_pairs:
            for k, v in f(x, i).items():
                tot[(k, j)] = tot.get((k, j), Fraction(0)) + c * v
            s = (-1) ** (P[x] * P[i])
            for k, v in f(x, j).items():
                tot[(i, k)] = tot.get((i, k), Fraction(0)) + s * c * v
        if any(tot.values()):
            bad.append("t invariance")
    # φ: coordinate formula, graded symmetry, invariance
    for (x, y, z), c in lie.phi.items():
        if lie.phi.get((x, z, y), 0) != (-1) ** (P[y] * P[z]) * c:
            bad.append("phi symmetry")
        if lie.phi.get((y, x, z), 0) != (-1) ** (P[x] * P[y]) * c:
            bad.append("phi symmetry")
    for x in range(d):
        for y in range(d):
            for z in range(d):
                tot = Fraction(0)
                for j in range(d):
                    for k in range(d):
                        if lie.tinv[x][j] and lie.tinv[k][z]:
                            tot += lie.tinv[x][j] * lie.bracket_coeff(j, k, y) * lie.tinv[k][z]
                want = (-1) ** P[y] * tot / 24
                if lie.phi.get((x, y, z), 0) != want:
                    bad.append("phi formula")
    for w in range(d):
        tot: Dict[Tuple[int, int, int], Fraction] = {}
        for (x, y, z), c in lie.phi.items():
            for k, v in f(w, x).items():
                key = (k, y, z)
                tot[key] = tot.get(key, Fraction(0)) + c * v
            for k, v in f(w, y).items():
                key = (x, k, z)
                tot[key] = tot.get(key, Fraction(0)) + (-1) ** (P[w] * P[x]) * c * v
            for k, v in f(w, z).items():
                key = (x, y, k)
                tot[key] = tot.get(key, Fraction(0)) + (-1) ** (P[w] * (P[x] + P[y])) * c * v
        if any(tot.values()):
            bad.append("phi invariance")
    # ν: central, pairs to the supertrace of ad
    nu = lie.nu_vector()
    for x in range(d):
        if lie.bracket(nu, {x: 1}):
            bad.append("nu central")
        if lie.pairing(nu, {x: 1}) != lie.str_ad(x):
            bad.append("nu pairing")
    return sorted(set(bad))


def _t_tilde(lie, a, b):
    return [[Op.make((a,), {i: 1}), Op.make((b,), row)] for i, row in _t_rows(lie)]


def _phi_tilde(lie, a, b, c):
    grouped: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for (x, y, z), v in lie.phi.items():
        grouped.setdefault((x, y), {})[z] = v
    return [[Op.make((a,), {x: 1}), Op.make((b,), {y: 1}), Op.make((c,), vec)] for (x, y), vec in grouped.items()]


def _apply(f, pt, words) -> Grassmann:
    out = Grassmann()
    for ops in words:
        out = out + derivative(f, pt, ops)
    return out


def _compose(A, B):
    return [x + y for x in A for y in B]


def check_t_relations(group, seed: int) -> List[str]:
    """Operator relations of the half-edge lifts of t, φ and ν at one vertex."""
    sk = builtin("torus")
    rng = random.Random(seed)
    pt = random_point(sk, group, seed)
    lie = group.lie
    small = group.kind == "q" and group.n > 1
    f = _entry_function(sk, rng, group, 1 if small else 3, 3)
    a, b, c, d = sk.half_edges_at(sk.vertex_ids()[0])
    bad = []
    nu = lie.nu_vector()
    lhs = _apply(f, pt, _t_tilde(lie, a, a))
    rhs = derivative(f, pt, [Op.make((a,), nu)]) * Fraction(1, 2) if nu else Grassmann()
    if lhs != rhs:
        bad.append("t_aa")
    tab, tba, tbc, tcd = _t_tilde(lie, a, b), _t_tilde(lie, b, a), _t_tilde(lie, b, c), _t_tilde(lie, c, d)
    if _apply(f, pt, tab) != -_apply(f, pt, tba):
        bad.append("t antisymmetry")
    if _apply(f, pt, _compose(tab, tbc)) + _apply(f, pt, _compose(tbc, tab)) != _apply(f, pt, _phi_tilde(lie, a, b, c)) * -24:
        bad.append("[t_ab, t_bc]")
    twice = _apply(f, pt, _compose(tab, tab)) * 2
    if twice != (_apply(f, pt, _phi_tilde(lie, a, a, b)) + _apply(f, pt, _phi_tilde(lie, a, b, b))) * 24:
        bad.append("[t_ab, t_ab]")
    if not (_apply(f, pt, _compose(tab, tcd)) + _apply(f, pt, _compose(tcd, tab))).is_zero():
        bad.append("[t_ab, t_cd]")
    return bad


def _sparse_q_point(n: int, rng: random.Random, next_gen: int, odd_entries: int = 2):
    """A Q(n) element with only a few odd generators (keeps n = 3 cheap)."""
    from .superalgebra import rational_det

    while True:
        x = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        if rational_det(x) != 0:
            break
    y = [[Grassmann() for _ in range(n)] for _ in range(n)]
    for _ in range(odd_entries):
        i, j = rng.randrange(n), rng.randrange(n)
        y[i][j] = y[i][j] + Grassmann.generator(next_gen)
        next_gen += 1
    return QElement(n, x, y), next_gen


def _trial_algebra_ids(cfg: SuiteConfig, seed: int) -> dict:
    rng = random.Random(seed)
    for n in (1, 2, 3):
        q = QGroup(n).lie
        _expect(check_discardy(q), "discardy", n=n)
        X = [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]
        _expect(check_matrix_units(n, X), "matrix units", n=n, X=X)
        _expect(not q.nu_vector(), "q(n) unimodular", n=n)
        if seed == cfg.seed:
            _expect(not check_metric_tensors(q), "metric tensors", n=n, failures=check_metric_tensors(q))
        # otr cyclicity and odet additivity
        if n < 3:
            group = QGroup(n)
            g, gen = group.random_element(rng, 1)
            h, gen = group.random_element(rng, gen)
        else:
            g, gen = _sparse_q_point(n, rng, 1)
            h, gen = _sparse_q_point(n, rng, gen)
        _expect(otr(g * h) == otr(h * g), "otr cyclicity", n=n)
        _expect(odet(g * h) == odet(g) + odet(h), "odet additivity", n=n)
        _expect(odet(g.inverse()) == -odet(g), "odet inverse", n=n)
    for n in (1, 2):
        group = QGroup(n)
        sk = builtin("torus")
        pt = random_point(sk, group, seed)
        # the differentiated edge must occur once, or other slots contribute too
        w = _prefer(lambda: random_path(sk, rng, 3), lambda p: sum(l[0] == p[-1][0] for l in p) == 1)
        f = function(Inv("odet", w))
        last = w[-1]
        he = sk.start_half_edge(last)
        # the start slot of the first letter acts by right multiplication on the holonomy
        for i in range(group.lie.dim):
            val = derivative(f, pt, [Op.make((he,), {i: 1})])
            _expect(val == Grassmann.scalar(-group.lie.otr_coeffs[i]), "odet derivative", n=n, direction=i)
    dbl = odd_double(aff1())
    _expect(bool(dbl.nu_vector()), "double not unimodular")
    if seed == cfg.seed:
        _expect(not check_metric_tensors(dbl), "double tensors", failures=check_metric_tensors(dbl))
    # the Q(2) operator relations are the slow part, so they rotate across trials
    groups = [QGroup(1), DoubleGroup()] + ([QGroup(2)] if (seed - cfg.seed) % 4 == 0 else [])
    for group in groups:
        bad = check_t_relations(group, seed)
        _expect(not bad, "t relations", group=group.tag, failures=bad)
    return {}


def _trial_fusion(cfg: SuiteConfig, seed: int) -> dict:
    rng = random.Random(seed)
    an = _random_rotations(builtin("annulus2"), rng, 2)
    fused = fuse(an, "p", None, "q")
    info = {}
    for group in (QGroup(1), QGroup(2), DoubleGroup()):
        pt = random_point(an, group, seed)
        f = _entry_function(an, rng, group, 2, 3)
        lhs = fused_delta(f, pt, "p", "q")
        rhs = quasi_bv_delta(f, on_skeleton(pt, fused))
        _expect(lhs == rhs, "odd fusion", group=group.tag, f=f, lhs=lhs, rhs=rhs)
        info[group.tag] = not lhs.is_zero()
    group = GLGroup(2)
    pt = random_point(an, group, seed)
    f = _entry_function(an, rng, group, 1, 3)
    g = _entry_function(an, rng, group, 1, 3)
    lhs = fused_bracket(f, g, pt, "p", "q")
    rhs = fock_rosly_bracket(f, g, on_skeleton(pt, fused))
    _expect(lhs == rhs, "even fusion", f=f, g=g, lhs=lhs, rhs=rhs)
    return info


_TRIALS: Dict[str, Callable[[SuiteConfig, int], dict]] = {
    "GT_AXIOMS": _trial_gt_axioms,
    "REALIZATION": _trial_realization,
    "GOLDMAN_EVEN": _trial_goldman_even,
    "FR_INVARIANCE": _trial_fr_invariance,
    "FR_QUASI": _trial_fr_quasi,
    "BV_INVARIANCE": _trial_bv_invariance,
    "BV_SQUARE": _trial_bv_square,
    "GEOMETRIC_BV": _trial_geometric_bv,
    "ODD_GOLDMAN": _trial_odd_goldman,
    "ODD_GOLDMAN_EXT": _trial_odd_goldman_ext,
    "ALGEBRA_IDS": _trial_algebra_ids,
    "FUSION": _trial_fusion,
}


def run_suite(cfg, **overrides) -> Report:
    """Run a suite given a :class:`SuiteConfig` or a suite name plus options."""
    if not isinstance(cfg, SuiteConfig):
        cfg = SuiteConfig(str(cfg), **overrides)
    elif overrides:
        cfg = SuiteConfig(**{**cfg.__dict__, **overrides})
    trial_fn = _TRIALS.get(cfg.suite)
    if trial_fn is None:
        raise UnknownSuite(f"unknown suite {cfg.suite!r}; known: {', '.join(SUITES)}")
    start = time.perf_counter()
    results = []
    for i in range(cfg.trials):
        seed = cfg.seed + i
        try:
            info = trial_fn(cfg, seed) or {}
            results.append(TrialResult(seed, "PASS", None, info))
        except _Mismatch as exc:
            results.append(TrialResult(seed, "FAIL", {"seed": seed, **exc.payload}))
    elapsed = int((time.perf_counter() - start) * 1000)
    return Report(cfg.suite, results, elapsed)
