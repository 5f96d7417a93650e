"""Exact super linear algebra.

Everything here works over the rationals (``fractions.Fraction``) extended by
a Grassmann algebra of odd generators.  Points of a supergroup are modelled as
matrices whose entries are Grassmann numbers; a Grassmann coefficient ``c``
times a basis vector ``e`` is always read as ``c`` standing to the *left* of
``e``, and converted to the internal storage (coefficient on the right of the
matrix unit) with the appropriate Koszul sign.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .errors import JacobiViolation, NonInvertibleBody

Rational = Fraction


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions, ``mpq`` and ``"p/q"`` strings to a Fraction."""
    if type(value) is Fraction:
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


def format_rational(value) -> str:
    """Serialize a rational as ``"p/q"`` (``"p"`` when integral)."""
    q = to_rational(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _coef(c):
    """Internal coefficient type: int when integral, otherwise gmpy2 ``mpq``."""
    if type(c) is int:
        return c
    if isinstance(c, str):
        c = Fraction(c.strip())
    if isinstance(c, Fraction):
        q = mpq(int(c.numerator), int(c.denominator))
    else:
        q = mpq(c)
    if q.denominator == 1:
        return int(q.numerator)
    return q


# ---------------------------------------------------------------------------
# Grassmann numbers
# ---------------------------------------------------------------------------

_SIGNS: Dict[int, int] = {}
_SIGN_CACHE_LIMIT = 4_000_000


def _sign_uncached(a: int, b: int) -> int:
    count = 0
    rest = b
    while rest:
        low = rest & -rest
        count += (a & ~((low << 1) - 1)).bit_count()
        rest ^= low
    return -1 if count & 1 else 1


def _merge_sign(a: int, b: int) -> int:
    """Sign of reordering monomial ``a`` followed by ``b`` into sorted order."""
    if b >> 64:
        # keys pack b into 64 bits
        return _sign_uncached(a, b)
    key = (a << 64) | b
    s = _SIGNS.get(key)
    if s is None:
        s = _sign_uncached(a, b)
        if len(_SIGNS) < _SIGN_CACHE_LIMIT:
            _SIGNS[key] = s
    return s


def _mask_indices(mask: int) -> List[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _add_product(out: dict, a: dict, b: dict, twist_left: bool = False) -> None:
    """Accumulate the Grassmann product ``a*b`` into the term dict ``out``.

    With ``twist_left`` the parity involution is applied to ``a`` first.
    """
    # hot loop: the sign cache is consulted inline
    get = out.get
    b_items = list(b.items())
    signs = _SIGNS if all(mb >> 64 == 0 for mb, _ in b_items) else {}
    for ma, ca in a.items():
        if twist_left and ma.bit_count() & 1:
            ca = -ca
        hi = ma << 64
        for mb, cb in b_items:
            if ma & mb:
                continue
            s = signs.get(hi | mb)
            if s is None:
                s = _merge_sign(ma, mb)
            v = ca * cb if s > 0 else -(ca * cb)
            m = ma | mb
            v = get(m, 0) + v
            if v:
                out[m] = v
            else:
                del out[m]


class Grassmann:
    """An element of a Grassmann algebra with rational coefficients.

    Terms are stored as a dict from bitmask (bit ``i-1`` is generator ``i``)
    to coefficient.  Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = {} if terms is None else terms

    # construction -------------------------------------------------------
    @classmethod
    def scalar(cls, c) -> "Grassmann":
        c = _coef(c)
        return cls({0: c} if c else {})

    @classmethod
    def generator(cls, i: int, coeff=1) -> "Grassmann":
        if i < 1:
            raise ValueError("generator indices start at 1")
        coeff = _coef(coeff)
        return cls({1 << (i - 1): coeff} if coeff else {})

    @classmethod
    def monomial(cls, indices: Sequence[int], coeff=1) -> "Grassmann":
        """Product of generators in the given order times ``coeff``."""
        g = cls.scalar(coeff)
        for i in indices:
            g = g * cls.generator(i)
        return g

    @classmethod
    def from_json(cls, data) -> "Grassmann":
        out = cls.scalar(0)
        for term in data:
            out = out + cls.monomial(term["indices"], to_rational(term["coeff"]))
        return out

    # basic queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def body(self) -> Fraction:
        return to_rational(self.terms.get(0, 0))

    def is_scalar(self) -> bool:
        return all(m == 0 for m in self.terms)

    def parities(self) -> set:
        return {m.bit_count() & 1 for m in self.terms}

    def is_even(self) -> bool:
        return all(not (m.bit_count() & 1) for m in self.terms)

    def is_odd(self) -> bool:
        return all(m.bit_count() & 1 for m in self.terms)

    @property
    def generator_count(self) -> int:
        top = 0
        for m in self.terms:
            top = max(top, m.bit_length())
        return top

    def coefficient(self, indices: Iterable[int]) -> Fraction:
        """Coefficient of the sorted monomial on ``indices``."""
        mask = 0
        for i in indices:
            mask |= 1 << (i - 1)
        return to_rational(self.terms.get(mask, 0))

    def involution(self) -> "Grassmann":
        """Parity involution: negate the odd part."""
        return Grassmann({m: (-c if m.bit_count() & 1 else c) for m, c in self.terms.items()})

    def even_part(self) -> "Grassmann":
        return Grassmann({m: c for m, c in self.terms.items() if not m.bit_count() & 1})

    def odd_part(self) -> "Grassmann":
        return Grassmann({m: c for m, c in self.terms.items() if m.bit_count() & 1})

    def without_generators_above(self, k: int) -> "Grassmann":
        mask = (1 << k) - 1
        return Grassmann({m: c for m, c in self.terms.items() if not m & ~mask})

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other) -> "Grassmann":
        if not isinstance(other, Grassmann):
            other = Grassmann.scalar(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Grassmann(out)

    __radd__ = __add__

    def __neg__(self) -> "Grassmann":
        return Grassmann({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Grassmann":
        if not isinstance(other, Grassmann):
            other = Grassmann.scalar(other)
        return self + (-other)

    def __rsub__(self, other) -> "Grassmann":
        return Grassmann.scalar(other) - self

    def __mul__(self, other) -> "Grassmann":
        if not isinstance(other, Grassmann):
            c = _coef(other)
            if not c:
                return Grassmann()
            return Grassmann({m: v * c for m, v in self.terms.items()})
        out: dict = {}
        _add_product(out, self.terms, other.terms)
        return Grassmann(out)

    def __rmul__(self, other) -> "Grassmann":
        # scalars are even, so they commute with everything
        return self * other

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grassmann):
            try:
                other = Grassmann.scalar(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (m.bit_count(), _mask_indices(m))):
            c = format_rational(self.terms[m])
            idx = _mask_indices(m)
            if not idx:
                parts.append(c)
            else:
                mono = "".join(f"θ{i}" for i in idx)
                parts.append(mono if c == "1" else ("-" + mono if c == "-1" else f"{c}*{mono}"))
        return " + ".join(parts)

    def to_json(self) -> list:
        out = []
        for m in sorted(self.terms, key=lambda m: (m.bit_count(), _mask_indices(m))):
            out.append({"indices": _mask_indices(m), "coeff": format_rational(self.terms[m])})
        return out

    # jet support -------------------------------------------------------------
    def left_coefficient(self, tag_sequence: Sequence[int]) -> "Grassmann":
        """Return ``B`` with ``self = (θ_{t1}…θ_{tk})·B + (terms missing a tag)``.

        The tag generators must be the highest-indexed generators that occur in
        ``self`` (which holds by construction for freshly allocated jets).
        """
        tag_mask = 0
        for i in tag_sequence:
            tag_mask |= 1 << (i - 1)
        k = len(tag_sequence)
        # sign turning the ascending tag block into the requested order
        perm = sorted(tag_sequence)
        pos = {v: j for j, v in enumerate(perm)}
        seq = [pos[v] for v in tag_sequence]
        inversions = sum(1 for x in range(k) for y in range(x + 1, k) if seq[x] > seq[y])
        base = -1 if inversions & 1 else 1
        out = {}
        for m, c in self.terms.items():
            if m & tag_mask != tag_mask:
                continue
            rest = m ^ tag_mask
            if rest >> (min(tag_sequence) - 1):
                raise ValueError("jet tags must be the highest generators present")
            s = base
            if k & 1 and rest.bit_count() & 1:
                s = -s
            out[rest] = c if s > 0 else -c
        return Grassmann(out)


def grassmann_product(a: Grassmann, b: Grassmann) -> Grassmann:
    """Koszul-signed product of two Grassmann numbers."""
    return a * b


ZERO = Grassmann()
ONE = Grassmann({0: 1})


def gscalar(c) -> Grassmann:
    return Grassmann.scalar(c)


# ---------------------------------------------------------------------------
# rational matrices
# ---------------------------------------------------------------------------


def rational_inverse(m: Sequence[Sequence]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse over the rationals; raises NonInvertibleBody."""
    n = len(m)
    a = [[to_rational(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise NonInvertibleBody("singular rational body")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def rational_det(m: Sequence[Sequence]) -> Fraction:
    n = len(m)
    a = [[to_rational(x) for x in row] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def solve_linear(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """Solve ``Σ x_k columns[k] = target`` exactly; None if inconsistent.

    The columns are assumed linearly independent.
    """
    rows = len(target)
    k = len(columns)
    a = [[to_rational(columns[j][i]) for j in range(k)] + [to_rational(target[i])] for i in range(rows)]
    r = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(r, rows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(rows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    for i in range(r, rows):
        if a[i][k] != 0:
            return None
    x = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        x[col] = a[i][k]
    return x


# ---------------------------------------------------------------------------
# Grassmann-valued matrices
# ---------------------------------------------------------------------------

Matrix = Tuple[Tuple[Grassmann, ...], ...]


def _gmat(rows) -> Matrix:
    return tuple(tuple(x if isinstance(x, Grassmann) else Grassmann.scalar(x) for x in row) for row in rows)


def _zero_mat(n: int) -> Matrix:
    return tuple(tuple(Grassmann() for _ in range(n)) for _ in range(n))


def _id_mat(n: int) -> Matrix:
    return tuple(tuple(Grassmann({0: 1}) if i == j else Grassmann() for j in range(n)) for i in range(n))


def _mat_is_zero(m: Matrix) -> bool:
    return all(not x.terms for row in m for x in row)


def _mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_neg(a: Matrix) -> Matrix:
    return tuple(tuple(-x for x in row) for row in a)


def _mat_body(a: Matrix) -> List[List[Fraction]]:
    return [[x.body() for x in row] for row in a]


def _mat_involution(a: Matrix) -> Matrix:
    return tuple(tuple(x.involution() for x in row) for row in a)


def _mat_mul_into(out: List[List[dict]], a: Matrix, b: Matrix, twist_left: bool = False) -> None:
    n = len(a)
    m = len(b[0]) if b else 0
    inner = len(b)
    for i in range(n):
        row = a[i]
        for k in range(inner):
            ta = row[k].terms
            if not ta:
                continue
            bk = b[k]
            for j in range(m):
                tb = bk[j].terms
                if tb:
                    _add_product(out[i][j], ta, tb, twist_left)


def _freeze(acc: List[List[dict]]) -> Matrix:
    return tuple(tuple(Grassmann(d) for d in row) for row in acc)


def _fresh(n: int, m: Optional[int] = None) -> List[List[dict]]:
    m = n if m is None else m
    return [[{} for _ in range(m)] for _ in range(n)]


def matrix_to_json(m: Matrix) -> list:
    return [[x.to_json() for x in row] for row in m]


# ---------------------------------------------------------------------------
# q_as(n): X + ξY
# ---------------------------------------------------------------------------


class QElement:
    """An element ``X + ξY`` of ``Mat_n ⊗ R[ξ]/(ξ²-1)`` over a Grassmann algebra.

    Storage convention: ``X`` and ``Y`` hold the Grassmann coefficients written
    to the right of ``E`` and ``ξE`` respectively.
    """

    __slots__ = ("n", "X", "Y")

    def __init__(self, n: int, X, Y=None):
        self.n = n
        self.X = _gmat(X)
        self.Y = _zero_mat(n) if Y is None else _gmat(Y)

    @classmethod
    def identity(cls, n: int) -> "QElement":
        return cls(n, _id_mat(n), _zero_mat(n))

    def identity_like(self) -> "QElement":
        return QElement.identity(self.n)

    @classmethod
    def xi(cls, n: int) -> "QElement":
        return cls(n, _zero_mat(n), _id_mat(n))

    def __mul__(self, other):
        if not isinstance(other, QElement):
            return self.scale_right(other)
        n = self.n
        x_acc = _fresh(n)
        _mat_mul_into(x_acc, self.X, other.X)
        _mat_mul_into(x_acc, self.Y, other.Y, twist_left=True)
        y_acc = _fresh(n)
        _mat_mul_into(y_acc, self.X, other.Y, twist_left=True)
        _mat_mul_into(y_acc, self.Y, other.X)
        return QElement(n, _freeze(x_acc), _freeze(y_acc))

    def __add__(self, other: "QElement") -> "QElement":
        return QElement(self.n, _mat_add(self.X, other.X), _mat_add(self.Y, other.Y))

    def __sub__(self, other: "QElement") -> "QElement":
        return self + (-other)

    def __neg__(self) -> "QElement":
        return QElement(self.n, _mat_neg(self.X), _mat_neg(self.Y))

    def __eq__(self, other) -> bool:
        return isinstance(other, QElement) and self.n == other.n and self.X == other.X and self.Y == other.Y

    def __hash__(self):
        return hash((self.n, self.X, self.Y))

    def __repr__(self):
        return f"QElement(n={self.n}, X={self.X!r}, Y={self.Y!r})"

    def scale_left(self, c) -> "QElement":
        """``c · self`` with ``c`` a Grassmann number written on the left."""
        if not isinstance(c, Grassmann):
            c = Grassmann.scalar(c)
        ci = c.involution()
        return QElement(
            self.n,
            tuple(tuple(c * x for x in row) for row in self.X),
            tuple(tuple(ci * y for y in row) for row in self.Y),
        )

    def scale_right(self, c) -> "QElement":
        if not isinstance(c, Grassmann):
            c = Grassmann.scalar(c)
        return QElement(
            self.n,
            tuple(tuple(x * c for x in row) for row in self.X),
            tuple(tuple(y * c for y in row) for row in self.Y),
        )

    def is_zero(self) -> bool:
        return _mat_is_zero(self.X) and _mat_is_zero(self.Y)

    def body(self) -> "QElement":
        return QElement(self.n, _mat_body(self.X), _mat_body(self.Y))

    def is_group_valued(self) -> bool:
        if not all(x.is_even() for row in self.X for x in row):
            return False
        if not all(y.is_odd() for row in self.Y for y in row):
            return False
        return rational_det(_mat_body(self.X)) != 0

    def flat(self) -> List[Grassmann]:
        return [x for row in self.X for x in row] + [y for row in self.Y for y in row]

    def inverse(self) -> "QElement":
        """Exact inverse via the body inverse and a finite Neumann series."""
        n = self.n
        bx = _mat_body(self.X)
        by = _mat_body(self.Y)
        if any(v != 0 for row in by for v in row):
            # a rational body in q_as(n) splits along ξ = ±1
            p = rational_inverse([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(bx, by)])
            m = rational_inverse([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(bx, by)])
            half = Fraction(1, 2)
            binv = QElement(
                n,
                [[half * (a + b) for a, b in zip(r1, r2)] for r1, r2 in zip(p, m)],
                [[half * (a - b) for a, b in zip(r1, r2)] for r1, r2 in zip(p, m)],
            )
        else:
            binv = QElement(n, rational_inverse(bx))
        nil = binv * (self - self.body())
        result = QElement.identity(n)
        power = QElement.identity(n)
        sign = 1
        while True:
            power = power * nil
            if power.is_zero():
                break
            sign = -sign
            result = result + (power if sign > 0 else -power)
        return result * binv


def otr(a: QElement) -> Grassmann:
    """Odd trace: the trace of the ξ block."""
    out = Grassmann()
    for i in range(a.n):
        out = out + a.Y[i][i]
    return out


def qtrace(a: QElement) -> Grassmann:
    out = Grassmann()
    for i in range(a.n):
        out = out + a.X[i][i]
    return out


def _gmat_mul(a: Matrix, b: Matrix, twist_left: bool = False) -> Matrix:
    acc = _fresh(len(a), len(b[0]))
    _mat_mul_into(acc, a, b, twist_left)
    return _freeze(acc)


def _gmat_inverse(a: Matrix) -> Matrix:
    n = len(a)
    binv = _gmat(rational_inverse(_mat_body(a)))
    body = _gmat(_mat_body(a))
    nil = _gmat_mul(binv, _mat_add(a, _mat_neg(body)))
    result = _id_mat(n)
    power = _id_mat(n)
    sign = 1
    while True:
        power = _gmat_mul(power, nil)
        if _mat_is_zero(power):
            break
        sign = -sign
        result = _mat_add(result, power if sign > 0 else _mat_neg(power))
    return _gmat_mul(result, binv)


def odet(a: QElement) -> Grassmann:
    """Odd determinant ``Σ_{j odd} Tr((X⁻¹Y)^j)/j`` (finite sum).

    With ``ξ`` stored to the left of ``Y``, moving it through each odd block
    applies the parity involution, so the j-th power is read as the
    alternating product ``z π(z) z π(z) …`` with ``z = X⁻¹Y``.
    """
    xinv = _gmat_inverse(a.X)
    z = _gmat_mul(xinv, a.Y)
    step = _gmat_mul(_mat_involution(z), z)
    out = Grassmann()
    power = z
    j = 1
    while not _mat_is_zero(power):
        tr = Grassmann()
        for i in range(a.n):
            tr = tr + power[i][i]
        out = out + tr * Fraction(1, j)
        # even powers have zero trace, so step by two
        power = _gmat_mul(power, step)
        j += 2
    return out


def supermatrix_inverse(a: QElement) -> QElement:
    return a.inverse()


# ---------------------------------------------------------------------------
# general supermatrices End(V0|V1)
# ---------------------------------------------------------------------------


class SuperMatrix:
    """Square supermatrix with Grassmann entries.

    ``parities[i]`` is the parity of the i-th basis vector.  The coefficient
    of the matrix unit ``E_ij`` is stored to its right; products carry the
    Koszul sign from moving a coefficient past ``E_jl``.
    """

    __slots__ = ("parities", "M")

    def __init__(self, parities: Sequence[int], entries):
        self.parities = tuple(parities)
        self.M = _gmat(entries)

    @classmethod
    def identity(cls, parities: Sequence[int]) -> "SuperMatrix":
        return cls(parities, _id_mat(len(parities)))

    def identity_like(self) -> "SuperMatrix":
        return SuperMatrix.identity(self.parities)

    @property
    def n(self) -> int:
        return len(self.parities)

    def _all_even(self) -> bool:
        return not any(self.parities)

    def __mul__(self, other):
        if not isinstance(other, SuperMatrix):
            return SuperMatrix(self.parities, tuple(tuple(x * other for x in row) for row in self.M))
        n = self.n
        p = self.parities
        acc = _fresh(n)
        if self._all_even():
            _mat_mul_into(acc, self.M, other.M)
            return SuperMatrix(p, _freeze(acc))
        for i in range(n):
            for j in range(n):
                ta = self.M[i][j].terms
                if not ta:
                    continue
                for l in range(n):
                    tb = other.M[j][l].terms
                    if tb:
                        _add_product(acc[i][l], ta, tb, bool((p[j] + p[l]) & 1))
        return SuperMatrix(p, _freeze(acc))

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        return SuperMatrix(self.parities, _mat_add(self.M, other.M))

    def __neg__(self) -> "SuperMatrix":
        return SuperMatrix(self.parities, _mat_neg(self.M))

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, SuperMatrix) and self.parities == other.parities and self.M == other.M

    def __hash__(self):
        return hash((self.parities, self.M))

    def __repr__(self):
        return f"SuperMatrix({self.parities}, {self.M!r})"

    def scale_left(self, c) -> "SuperMatrix":
        if not isinstance(c, Grassmann):
            c = Grassmann.scalar(c)
        ci = c.involution()
        p = self.parities
        return SuperMatrix(
            p,
            tuple(
                tuple((ci if (p[i] + p[j]) & 1 else c) * x for j, x in enumerate(row))
                for i, row in enumerate(self.M)
            ),
        )

    def is_zero(self) -> bool:
        return _mat_is_zero(self.M)

    def body(self) -> "SuperMatrix":
        return SuperMatrix(self.parities, _mat_body(self.M))

    def flat(self) -> List[Grassmann]:
        return [x for row in self.M for x in row]

    def inverse(self) -> "SuperMatrix":
        binv = SuperMatrix(self.parities, rational_inverse(_mat_body(self.M)))
        nil = binv * (self - self.body())
        result = self.identity_like()
        power = self.identity_like()
        sign = 1
        while True:
            power = power * nil
            if power.is_zero():
                break
            sign = -sign
            result = result + (power if sign > 0 else -power)
        return result * binv


def supertrace(a: SuperMatrix) -> Grassmann:
    out = Grassmann()
    for i, p in enumerate(a.parities):
        out = out + (-a.M[i][i] if p else a.M[i][i])
    return out


def mtrace(a: SuperMatrix) -> Grassmann:
    out = Grassmann()
    for i in range(a.n):
        out = out + a.M[i][i]
    return out


# ---------------------------------------------------------------------------
# metric Lie data
# ---------------------------------------------------------------------------


def _rational_entries(elem) -> List[Fraction]:
    return [x.body() for x in elem.flat()]


def _supercommutator(a, b, pa: int, pb: int):
    ab = a * b
    ba = b * a
    return ab - ba if not (pa and pb) else ab + ba


def _structure_constants(basis, parity) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
    cols = [_rational_entries(e) for e in basis]
    f = {}
    for i, j in iproduct(range(len(basis)), repeat=2):
        br = _supercommutator(basis[i], basis[j], parity[i], parity[j])
        coeffs = solve_linear(cols, _rational_entries(br))
        if coeffs is None:
            raise JacobiViolation("realization is not closed under the bracket")
        nz = {k: c for k, c in enumerate(coeffs) if c}
        if nz:
            f[(i, j)] = nz
    return f


def _product_constants(basis) -> Dict[Tuple[int, ...], Dict[int, Fraction]]:
    cols = [_rational_entries(e) for e in basis]
    c = {}
    for i, j in iproduct(range(len(basis)), repeat=2):
        coeffs = solve_linear(cols, _rational_entries(basis[i] * basis[j]))
        nz = {k: v for k, v in enumerate(coeffs) if v}
        if nz:
            c[(i, j)] = nz
    return c


class EvenLieData:
    """A finite-dimensional (purely even) Lie algebra by structure constants.

    ``f`` maps ``(i, j)`` to ``{k: f^k_ij}``.  ``group_sampler`` optionally
    returns a random coadjoint matrix ``Ad*_g`` of a group element.
    """

    def __init__(self, names: Sequence[str], f: Dict[Tuple[int, int], Dict[int, Fraction]], group_sampler=None):
        self.names = list(names)
        self.dim = len(self.names)
        self.f = {k: {kk: Fraction(v) for kk, v in d.items() if v} for k, d in f.items()}
        self.group_sampler = group_sampler
        self.check_jacobi()

    def bracket_coeff(self, i: int, j: int, k: int) -> Fraction:
        return self.f.get((i, j), {}).get(k, Fraction(0))

    def check_jacobi(self) -> None:
        d = self.dim
        for i in range(d):
            for j in range(d):
                if self.bracket_coeff(i, j, 0) + self.bracket_coeff(j, i, 0) != 0 or any(
                    self.bracket_coeff(i, j, k) + self.bracket_coeff(j, i, k) != 0 for k in range(d)
                ):
                    raise JacobiViolation(f"bracket not antisymmetric on ({i}, {j})")
        for i, j, k in iproduct(range(d), repeat=3):
            for m in range(d):
                total = Fraction(0)
                for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                    for l in range(d):
                        total += self.bracket_coeff(b, c, l) * self.bracket_coeff(a, l, m)
                if total != 0:
                    raise JacobiViolation(f"Jacobi fails on ({i}, {j}, {k})")

    def ad_trace(self, i: int) -> Fraction:
        return sum((self.bracket_coeff(i, j, j) for j in range(self.dim)), Fraction(0))


def _aff1_sampler(rng) -> List[List[Fraction]]:
    # group element [[a, b], [0, 1]]; Ad_g has columns x -> x - b y, y -> a y
    a = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))
    b = Fraction(rng.randint(-3, 3))
    ad_inv = rational_inverse([[1, 0], [-b, a]])
    return [[ad_inv[j][i] for j in range(2)] for i in range(2)]


def aff1() -> EvenLieData:
    """The two-dimensional non-abelian Lie algebra ``[x, y] = y``."""
    return EvenLieData(["x", "y"], {(0, 1): {1: 1}, (1, 0): {1: -1}}, group_sampler=_aff1_sampler)


def abelian(dim: int) -> EvenLieData:
    ident = lambda rng: [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    return EvenLieData([f"x{i}" for i in range(dim)], {}, group_sampler=ident)


class _MetricBase:
    dim: int
    parity: List[int]
    basis: list
    f: Dict[Tuple[int, int], Dict[int, Fraction]]

    def bracket_coeff(self, i: int, j: int, k: int) -> Fraction:
        return self.f.get((i, j), {}).get(k, Fraction(0))

    def identity(self):
        return self.basis[0].identity_like() if self.basis else None

    def element(self, coeffs: Dict[int, Grassmann]):
        """Algebra element ``Σ c_i · e_i`` (coefficients on the left)."""
        out = None
        for i, c in coeffs.items():
            term = self.basis[i].scale_left(c)
            out = term if out is None else out + term
        if out is None:
            out = self.identity() - self.identity()
        return out

    def vector_parity(self, vec: Dict[int, Fraction]) -> int:
        ps = {self.parity[i] for i, c in vec.items() if c}
        if len(ps) > 1:
            raise ValueError("inhomogeneous Lie algebra element")
        return ps.pop() if ps else 0


class OddMetricLieData(_MetricBase):
    """A Lie superalgebra with an odd invariant pairing, plus derived tensors.

    Attributes: ``t`` (pairing matrix t_ij), ``tinv`` (t^ij with
    t^ij t_jk = δ_ik), ``phi`` ({(x,y,z): φ^xyz}), ``nu`` (list of ν^k) and
    ``t_pairs`` (list of ``(i, j, (-1)^{|e_i|} t^ij)`` for the nonzero terms).
    """

    def __init__(self, name: str, basis, parity, t, f=None, assoc=None, otr_coeffs=None, unit=None):
        self.name = name
        self.basis = list(basis)
        self.dim = len(self.basis)
        self.parity = list(parity)
        self.f = f if f is not None else _structure_constants(self.basis, self.parity)
        self.t = [[Fraction(x) for x in row] for row in t]
        self.tinv = rational_inverse(self.t)
        self.assoc = assoc
        self.otr_coeffs = otr_coeffs
        self.unit = unit
        d = self.dim
        self.t_pairs = [
            (i, j, (-1 if self.parity[i] else 1) * self.tinv[i][j])
            for i in range(d)
            for j in range(d)
            if self.tinv[i][j]
        ]
        self.nu = [
            sum((c * self.bracket_coeff(i, j, k) for i, j, c in self.t_pairs), Fraction(0)) for k in range(d)
        ]
        self.phi = self._cartan_tensor()

    def _cartan_tensor(self) -> Dict[Tuple[int, int, int], Fraction]:
        d = self.dim
        out = {}
        for x, y, z in iproduct(range(d), repeat=3):
            total = Fraction(0)
            for j in range(d):
                if not self.tinv[x][j]:
                    continue
                for k in range(d):
                    if self.tinv[k][z]:
                        total += self.tinv[x][j] * self.bracket_coeff(j, k, y) * self.tinv[k][z]
            if total:
                sign = -1 if self.parity[y] else 1
                out[(x, y, z)] = sign * total / 24
        return out

    def pairing(self, u: Dict[int, Fraction], v: Dict[int, Fraction]) -> Fraction:
        return sum((a * b * self.t[i][j] for i, a in u.items() for j, b in v.items()), Fraction(0))

    def bracket(self, u: Dict[int, Fraction], v: Dict[int, Fraction]) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.f.get((i, j), {}).items():
                    out[k] = out.get(k, Fraction(0)) + a * b * c
        return {k: c for k, c in out.items() if c}

    def str_ad(self, x: int) -> Fraction:
        return sum(((-1 if self.parity[j] else 1) * self.bracket_coeff(x, j, j) for j in range(self.dim)), Fraction(0))

    def nu_vector(self) -> Dict[int, Fraction]:
        return {k: c for k, c in enumerate(self.nu) if c}


class EvenMetricLieData(_MetricBase):
    """An even Lie algebra with invariant symmetric pairing ``s``."""

    def __init__(self, name: str, basis, pairing, f=None):
        self.name = name
        self.basis = list(basis)
        self.dim = len(self.basis)
        self.parity = [0] * self.dim
        self.f = f if f is not None else _structure_constants(self.basis, self.parity)
        self.pairing_matrix = [[Fraction(x) for x in row] for row in pairing]
        self.s = rational_inverse(self.pairing_matrix)
        d = self.dim
        self.s_pairs = [(i, j, self.s[i][j]) for i in range(d) for j in range(d) if self.s[i][j]]
        self.f_upper = {}
        for i, j, k in iproduct(range(d), repeat=3):
            total = Fraction(0)
            for (x, y), dk in self.f.items():
                c = dk.get(i)
                if c and self.s[x][j] and self.s[y][k]:
                    total += c * self.s[x][j] * self.s[y][k]
            if total:
                self.f_upper[(i, j, k)] = total
        self.phi = {key: v / 24 for key, v in self.f_upper.items()}


def _matrix_unit(n: int, a: int, b: int) -> List[List[int]]:
    return [[int(i == a and j == b) for j in range(n)] for i in range(n)]


def build_qn(n: int) -> OddMetricLieData:
    """The queer Lie superalgebra q(n) with pairing ``otr(e_i e_j)``."""
    if n < 1:
        raise ValueError("n must be positive")
    units = [(a, b) for a in range(n) for b in range(n)]
    zero = [[0] * n for _ in range(n)]
    basis = [QElement(n, _matrix_unit(n, a, b), zero) for a, b in units]
    basis += [QElement(n, zero, _matrix_unit(n, a, b)) for a, b in units]
    parity = [0] * len(units) + [1] * len(units)
    t = [[otr(x * y).body() for y in basis] for x in basis]
    assoc = _product_constants(basis)
    otr_coeffs = [otr(x).body() for x in basis]
    unit = [Fraction(int(i < n * n and units[i][0] == units[i][1])) for i in range(2 * n * n)]
    return OddMetricLieData(f"q({n})", basis, parity, t, assoc=assoc, otr_coeffs=otr_coeffs, unit=unit)


def odd_double(h: EvenLieData) -> OddMetricLieData:
    """``h ⋉ Πh*`` with coadjoint action and the odd evaluation pairing.

    Basis: ``x_1..x_m`` (even) then the dual basis ``ψ^1..ψ^m`` (odd).  The
    realization acts on ``h* | R``: ``x`` by its coadjoint matrix, ``ψ`` as an
    odd column.  It is used for group computations and is faithful exactly
    when ``h`` has trivial centre.
    """
    h.check_jacobi()
    m = h.dim
    d = 2 * m
    f: Dict[Tuple[int, int], Dict[int, Fraction]] = {}

    def put(i, j, k, c):
        if c:
            f.setdefault((i, j), {})
            f[(i, j)][k] = f[(i, j)].get(k, Fraction(0)) + c

    for i in range(m):
        for j in range(m):
            for k in range(m):
                put(i, j, k, h.bracket_coeff(i, j, k))
                # [x_i, ψ^k] = -Σ_j f^k_ij ψ^j
                put(i, m + k, m + j, -h.bracket_coeff(i, j, k))
                put(m + k, i, m + j, h.bracket_coeff(i, j, k))
    parities = [0] * m + [1]
    basis = []
    for i in range(m):
        mat = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
        for j in range(m):
            for k in range(m):
                # column k is the image of ψ^k
                mat[j][k] = -h.bracket_coeff(i, j, k)
        basis.append(SuperMatrix(parities, mat))
    for k in range(m):
        mat = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
        mat[k][m] = Fraction(1)
        basis.append(SuperMatrix(parities, mat))
    t = [[Fraction(0)] * d for _ in range(d)]
    for i in range(m):
        t[i][m + i] = Fraction(1)
        t[m + i][i] = Fraction(1)
    data = OddMetricLieData(f"double({','.join(h.names)})", basis, [0] * m + [1] * m, t, f=f)
    data.base = h
    return data


def build_gln(n: int) -> EvenMetricLieData:
    """gl(n) with the trace pairing; basis ``E_(αβ)`` in row-major order."""
    units = [(a, b) for a in range(n) for b in range(n)]
    basis = [SuperMatrix([0] * n, _matrix_unit(n, a, b)) for a, b in units]
    pairing = [[mtrace(x * y).body() for y in basis] for x in basis]
    return EvenMetricLieData(f"gl({n})", basis, pairing)


def is_faithful(data) -> bool:
    """Whether the stored realization of a Lie algebra is injective."""
    cols = [_rational_entries(e) for e in data.basis]
    for k in range(len(cols)):
        if solve_linear(cols[:k], cols[k]) is not None:
            return False
    return True
