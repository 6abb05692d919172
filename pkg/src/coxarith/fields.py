"""Exact arithmetic in real multiquadratic number fields.

A field Q(sqrt(d_1), ..., sqrt(d_r)) with squarefree, multiplicatively
independent radicands d_j is stored by its canonical ascending radicand
tuple.  Elements are dense vectors of rationals over the 2^r basis

    alpha_S = sqrt(prod_{j in S} d_j),    S a bitmask over the radicands,

so every operation is exact.  Real embeddings are sign vectors on the
radicands; signs of elements are certified by interval refinement, never
floating point.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, NamedTuple

__all__ = [
    "FieldTower",
    "FieldElement",
    "Embedding",
    "make_field",
    "embeddings",
    "sign_at",
    "approx_interval",
    "is_square",
    "subfields_index2",
    "intersect",
    "minimal_field_of",
    "is_algebraic_integer",
    "integral_rescale",
    "minimal_polynomial",
    "parse_element",
    "element_literal",
    "factorize",
    "squarefree_part",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _sieve(bound: int) -> list[int]:
    flags = bytearray([1]) * (bound + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, isqrt(bound) + 1):
        if flags[i]:
            flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
    return [i for i, ok in enumerate(flags) if ok]


_SMALL_PRIMES = _sieve(10_000)


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of |n| as sorted (prime, exponent) pairs, n != 0."""
    if n == 0:
        raise ValueError("factorize(0)")
    n = abs(n)
    out: list[tuple[int, int]] = []
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        if n < 10**8:  # no factor below 1e4, so n is prime
            out.append((n, 1))
        else:
            from sympy import factorint  # heavy import, only for large leftovers

            out.extend(sorted((int(p), int(e)) for p, e in factorint(n).items()))
    return tuple(out)


def squarefree_part(n: int) -> int:
    """The squarefree t with n = s^2 * t (sign carried by t)."""
    if n == 0:
        raise ValueError("squarefree_part(0)")
    t = -1 if n < 0 else 1
    for p, e in factorize(n):
        if e % 2:
            t *= p
    return t


def _sqfree_mul(a: int, b: int) -> int:
    # product of two squarefree positives, reduced squarefree; no factoring needed
    g = gcd(a, b)
    return (a // g) * (b // g)


def _closure(gens: Iterable[int]) -> frozenset[int]:
    """Subgroup of squarefree positive integers generated under reduced product."""
    group = {1}
    for t in gens:
        if t not in group:
            group |= {_sqfree_mul(t, h) for h in frozenset(group)}
    return frozenset(group)


class Embedding(NamedTuple):
    """A real embedding of a tower: radicand j maps to (-1)^bit_j(mask) * sqrt(d_j)."""

    tower: "FieldTower"
    mask: int

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(-1 if (self.mask >> j) & 1 else 1 for j in range(self.tower.r))

    @property
    def is_identity(self) -> bool:
        return self.mask == 0

    def __repr__(self) -> str:
        return f"Embedding({self.tower!r}, signs={self.signs})"


class FieldTower:
    """Canonical multiquadratic tower; construct through make_field()."""

    __slots__ = (
        "radicands",
        "r",
        "degree",
        "basis_radicand",
        "basis_class",
        "basis_scale",
        "class_to_mask",
        "_embeddings",
        "_hash",
    )

    def __init__(self, radicands: tuple[int, ...], _token: object = None):
        if _token is not _TOKEN:
            raise TypeError("use make_field() to construct towers")
        self.radicands = radicands
        self.r = len(radicands)
        self.degree = 1 << self.r
        prods = []
        for mask in range(self.degree):
            m = 1
            for j in range(self.r):
                if (mask >> j) & 1:
                    m *= radicands[j]
            prods.append(m)
        self.basis_radicand = tuple(prods)  # alpha_S^2, not necessarily squarefree
        cls, scl = [], []
        for m in prods:
            t = squarefree_part(m)
            cls.append(t)
            scl.append(isqrt(m // t))
        self.basis_class = tuple(cls)
        self.basis_scale = tuple(scl)
        self.class_to_mask = {t: S for S, t in enumerate(cls)}
        assert len(self.class_to_mask) == self.degree, "radicands not independent"
        self._embeddings = tuple(Embedding(self, e) for e in range(self.degree))
        self._hash = hash(radicands)

    # -- constructors -------------------------------------------------

    def element(self, coeffs: Iterable) -> "FieldElement":
        cs = tuple(Fraction(c) for c in coeffs)
        if len(cs) != self.degree:
            raise ValueError("coefficient vector has wrong length")
        return FieldElement(self, cs)

    def zero(self) -> "FieldElement":
        return self.element([0] * self.degree)

    def one(self) -> "FieldElement":
        return self.rational(1)

    def rational(self, q) -> "FieldElement":
        cs = [_ZERO] * self.degree
        cs[0] = Fraction(q)
        return FieldElement(self, tuple(cs))

    def sqrt(self, q) -> "FieldElement":
        """sqrt(q) for positive rational q whose square class lies in the tower."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError("sqrt of a nonpositive rational")
        n = q.numerator * q.denominator
        t = squarefree_part(n)
        mask = self.class_to_mask.get(t)
        if mask is None:
            raise ValueError(f"sqrt({q}) does not lie in {self}")
        # sqrt(q) = isqrt(n//t)/den * sqrt(t), and sqrt(t) = alpha_mask / scale
        coeff = Fraction(isqrt(n // t), q.denominator * self.basis_scale[mask])
        cs = [_ZERO] * self.degree
        cs[mask] = coeff
        return FieldElement(self, tuple(cs))

    def coerce(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.tower is self:
                return value
            return value.express_in(self)
        return self.rational(value)

    # -- structure ----------------------------------------------------

    @property
    def subgroup_classes(self) -> frozenset[int]:
        return frozenset(self.basis_class)

    def embeddings(self) -> tuple[Embedding, ...]:
        return self._embeddings

    @property
    def identity_embedding(self) -> Embedding:
        return self._embeddings[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldTower) and self.radicands == other.radicands

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"FieldTower{self.radicands}"

    def __str__(self) -> str:
        if self.r == 0:
            return "Q"
        return "Q(" + ",".join(f"sqrt({d})" for d in self.radicands) + ")"


_TOKEN = object()
_TOWER_CACHE: dict[tuple[int, ...], FieldTower] = {}


def make_field(raw_radicands: Iterable[int]) -> FieldTower:
    """Canonical tower containing sqrt(d) for every requested d.

    Radicands are reduced to squarefree parts, closed under products, and
    the canonical basis is the ascending greedy independent set drawn from
    the whole square-class subgroup (so equal fields get equal tuples).

    >>> make_field([2, 3]).radicands
    (2, 3)
    >>> make_field([8]).radicands
    (2,)
    >>> make_field([2, 3, 6]).radicands
    (2, 3)
    >>> make_field([6, 10, 15]).radicands == make_field([10, 15]).radicands
    True
    """
    gens = set()
    for d in raw_radicands:
        d = int(d)
        if d <= 0:
            raise ValueError("field not totally real / unsupported: radicand %d" % d)
        t = squarefree_part(d)
        if t > 1:
            gens.add(t)
    group = _closure(sorted(gens))
    picked: list[int] = []
    span = frozenset({1})
    for t in sorted(group - {1}):
        if t not in span:
            picked.append(t)
            span = _closure(span | {t})
    key = tuple(picked)
    tower = _TOWER_CACHE.get(key)
    if tower is None:
        tower = FieldTower(key, _TOKEN)
        _TOWER_CACHE[key] = tower
    return tower


class FieldElement:
    """Element of a FieldTower as an exact coefficient vector over the alpha basis.

    Equality and hashing use the tower-independent canonical term list, so
    the same number compares equal across different ambient towers.
    """

    __slots__ = ("tower", "coeffs")

    def __init__(self, tower: FieldTower, coeffs: tuple[Fraction, ...]):
        self.tower = tower
        self.coeffs = coeffs

    # -- canonical view ------------------------------------------------

    def canonical_terms(self) -> tuple[tuple[int, Fraction], ...]:
        """Sorted (square class, coefficient of sqrt(class)) pairs, nonzero only."""
        t = self.tower
        items = [
            (t.basis_class[S], c * t.basis_scale[S])
            for S, c in enumerate(self.coeffs)
            if c
        ]
        items.sort()
        return tuple(items)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.canonical_terms() == other.canonical_terms()
        if isinstance(other, (int, Fraction)):
            return self.canonical_terms() == ((1, Fraction(other)),) if other else not self.canonical_terms()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.canonical_terms())

    def __bool__(self) -> bool:
        return any(self.coeffs)

    # -- arithmetic ----------------------------------------------------

    def _pair(self, other) -> tuple["FieldElement", "FieldElement"]:
        if isinstance(other, (int, Fraction)):
            return self, self.tower.rational(other)
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")
        if other.tower is self.tower:
            return self, other
        try:
            return self, other.express_in(self.tower)
        except ValueError:
            return self.express_in(other.tower), other

    def __add__(self, other):
        a, b = self._pair(other)
        return FieldElement(a.tower, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.tower, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        a, b = self._pair(other)
        return FieldElement(a.tower, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return FieldElement(self.tower, tuple(c * q for c in self.coeffs))
        a, b = self._pair(other)
        deg = a.tower.degree
        rad = a.tower.basis_radicand
        out = [_ZERO] * deg
        nza = [(S, c) for S, c in enumerate(a.coeffs) if c]
        nzb = [(T, c) for T, c in enumerate(b.coeffs) if c]
        for S, cs in nza:
            for T, ct in nzb:
                out[S ^ T] += cs * ct * rad[S & T]
        return FieldElement(a.tower, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if not self:
            raise ZeroDivisionError("division by zero element")
        if self.is_rational:
            return self.tower.rational(1 / self.coeffs[0])
        acc = self.tower.one()
        for sigma in self.tower.embeddings()[1:]:
            acc = acc * self.conjugate(sigma)
        norm = acc * self
        assert norm.is_rational, "conjugate product must be rational"
        return acc * (1 / norm.coeffs[0])

    def __truediv__(self, other):
        a, b = self._pair(other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.tower.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- structure -----------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def conjugate(self, sigma: Embedding) -> "FieldElement":
        if sigma.tower is not self.tower:
            raise ValueError("embedding belongs to a different tower")
        mask = sigma.mask
        return FieldElement(
            self.tower,
            tuple(
                -c if (S & mask).bit_count() & 1 else c
                for S, c in enumerate(self.coeffs)
            ),
        )

    def rational_norm(self) -> Fraction:
        """Product of all real conjugates (the norm down to Q)."""
        acc = self
        for j in range(self.tower.r):
            acc = acc * acc.conjugate(Embedding(self.tower, 1 << j))
        assert acc.is_rational
        return acc.coeffs[0]

    def support_classes(self) -> frozenset[int]:
        t = self.tower
        return frozenset(t.basis_class[S] for S, c in enumerate(self.coeffs) if c)

    def express_in(self, target: FieldTower) -> "FieldElement":
        """Rewrite over another tower; raises ValueError if not contained."""
        if target is self.tower:
            return self
        out = [_ZERO] * target.degree
        for S, c in enumerate(self.coeffs):
            if not c:
                continue
            t = self.tower.basis_class[S]
            mask = target.class_to_mask.get(t)
            if mask is None:
                raise ValueError(f"element does not lie in {target}")
            out[mask] += c * Fraction(self.tower.basis_scale[S], target.basis_scale[mask])
        return FieldElement(target, tuple(out))

    def __repr__(self) -> str:
        return f"<{element_literal(self)} in {self.tower}>"


# -- embeddings and certified signs -------------------------------------


def embeddings(tower: FieldTower) -> tuple[Embedding, ...]:
    return tower.embeddings()


def approx_interval(x: FieldElement, sigma: Embedding, bits: int) -> tuple[Fraction, Fraction]:
    """Exact rational interval [lo, hi] containing sigma(x), width <= terms/2^bits."""
    lo = hi = _ZERO
    scale = 1 << bits
    scale2 = 1 << (2 * bits)
    tower = x.tower
    for S, c in enumerate(x.coeffs):
        if not c:
            continue
        if (S & sigma.mask).bit_count() & 1:
            c = -c
        m = tower.basis_radicand[S]
        a = isqrt(m * scale2)  # a <= sqrt(m)*2^bits < a+1
        t1 = c * Fraction(a, scale)
        t2 = c * Fraction(a + 1, scale)
        lo += min(t1, t2)
        hi += max(t1, t2)
    return lo, hi


def sign_at(x: FieldElement, sigma: Embedding) -> int:
    """Certified sign of sigma(x): exact zero test, then interval refinement."""
    if not x:
        return 0
    bits = 64
    while True:
        lo, hi = approx_interval(x, sigma, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


# -- square testing ------------------------------------------------------


def _rational_square(q: Fraction) -> tuple[bool, Fraction | None]:
    if q < 0:
        return False, None
    if q == 0:
        return True, _ZERO
    n = q.numerator * q.denominator
    s = isqrt(n)
    if s * s != n:
        return False, None
    return True, Fraction(s, q.denominator)


def _split_top(x: FieldElement) -> tuple[FieldElement, FieldElement, int, FieldTower]:
    """x = u + v*sqrt(d) with u, v over the prefix tower, d the top radicand."""
    tower = x.tower
    d = tower.radicands[-1]
    sub = make_field(tower.radicands[:-1])
    half = sub.degree
    top = 1 << (tower.r - 1)
    ucs = [_ZERO] * half
    vcs = [_ZERO] * half
    for S, c in enumerate(x.coeffs):
        if S & top:
            vcs[S ^ top] = c
        else:
            ucs[S] = c
    # prefix basis products agree with the sub tower's, coefficients carry over
    return FieldElement(sub, tuple(ucs)), FieldElement(sub, tuple(vcs)), d, sub


def _embed_up(x: FieldElement, tower: FieldTower, with_root: bool) -> FieldElement:
    """Lift an element of the prefix tower, optionally multiplied by sqrt(top)."""
    top = 1 << (tower.r - 1)
    cs = [_ZERO] * tower.degree
    for S, c in enumerate(x.coeffs):
        cs[S | top if with_root else S] = c
    return FieldElement(tower, tuple(cs))


def is_square(x) -> tuple[bool, FieldElement | None]:
    """Exact square test with verified witness.

    Recursive norm descent: in K = F(sqrt(d)), x = u + v*sqrt(d) is a square
    iff the norm u^2 - d*v^2 is a square s^2 in F and a branch (u +- s)/2 is
    a square p^2 in F; then (p + (v/2p)*sqrt(d))^2 = x.

    >>> two = make_field([2])
    >>> ok, w = is_square(two.element([3, 2]))
    >>> ok, w == two.element([1, 1])
    (True, True)
    """
    if isinstance(x, (int, Fraction)):
        ok, w = _rational_square(Fraction(x))
        return ok, (make_field([]).rational(w) if ok else None)
    tower = x.tower
    if tower.r == 0:
        ok, w = _rational_square(x.coeffs[0])
        return ok, (tower.rational(w) if ok else None)
    if not x:
        return True, tower.zero()
    u, v, d, sub = _split_top(x)
    if not v:
        ok, p = is_square(u)
        if ok:
            w = _embed_up(p, tower, False)
            assert w * w == x
            return True, w
        ok, p = is_square(u * d)
        if ok:
            w = _embed_up(p * Fraction(1, d), tower, True)
            assert w * w == x
            return True, w
        return False, None
    ok, s = is_square(u * u - v * v * d)
    if not ok:
        return False, None
    for s_branch in (s, -s):
        ok, p = is_square((u + s_branch) * Fraction(1, 2))
        if ok and p:
            b = v / (p * 2)
            w = _embed_up(p, tower, False) + _embed_up(b, tower, True)
            if w * w == x:
                return True, w
    return False, None


# -- subfield lattice ----------------------------------------------------


def subfields_index2(tower: FieldTower) -> list[FieldTower]:
    """The 2^r - 1 index-2 subfields (fixed fields of the order-2 subgroups)."""
    out = []
    for e in range(1, tower.degree):
        gens = [
            tower.basis_class[S]
            for S in range(tower.degree)
            if (S & e).bit_count() % 2 == 0 and tower.basis_class[S] > 1
        ]
        out.append(make_field(gens))
    return out


def intersect(f1: FieldTower, f2: FieldTower) -> FieldTower:
    common = f1.subgroup_classes & f2.subgroup_classes
    return make_field(sorted(common - {1}))


def minimal_field_of(elements: Iterable[FieldElement]) -> FieldTower:
    gens: set[int] = set()
    for x in elements:
        gens |= set(x.support_classes())
    return make_field(sorted(gens - {1}))


def fixing_embeddings(tower: FieldTower, sub: FieldTower) -> list[Embedding]:
    """Embeddings of the tower that restrict to the identity on the subfield."""
    subclasses = sub.subgroup_classes
    fixed = []
    for sigma in tower.embeddings():
        ok = True
        for S in range(tower.degree):
            if tower.basis_class[S] in subclasses and (S & sigma.mask).bit_count() & 1:
                ok = False
                break
        if ok:
            fixed.append(sigma)
    return fixed


# -- integrality ---------------------------------------------------------


def minimal_polynomial(x: FieldElement) -> list[Fraction]:
    """Monic minimal polynomial over Q, coefficients low-to-high degree."""
    orbit: list[FieldElement] = []
    seen = set()
    for sigma in x.tower.embeddings():
        y = x.conjugate(sigma)
        key = y.canonical_terms()
        if key not in seen:
            seen.add(key)
            orbit.append(y)
    poly = [x.tower.one()]
    for y in orbit:
        nxt = [x.tower.zero() for _ in range(len(poly) + 1)]
        for i, c in enumerate(poly):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * y
        poly = nxt
    out = []
    for c in poly:
        assert c.is_rational, "minimal polynomial must have rational coefficients"
        out.append(c.rational_value())
    return out


def is_algebraic_integer(x: FieldElement) -> bool:
    """True iff the minimal polynomial of x is monic with integer coefficients.

    >>> t = make_field([5])
    >>> is_algebraic_integer(t.element([Fraction(1, 2), Fraction(1, 2)]))
    True
    >>> is_algebraic_integer(t.rational(Fraction(1, 2)))
    False
    """
    return all(c.denominator == 1 for c in minimal_polynomial(x))


def integral_rescale(x: FieldElement) -> FieldElement:
    """x times a rational square, chosen so the coefficients are integers
    with squarefree content.  Same square class, algebraic integer output."""
    if not x:
        raise ValueError("cannot rescale 0")
    den = 1
    for c in x.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    y = x * (den * den)
    g = 0
    for c in y.coeffs:
        g = gcd(g, c.numerator)
    s = 1
    for p, e in factorize(g):
        s *= p ** (e // 2)
    return y * Fraction(1, s * s)


# -- element literals ----------------------------------------------------

_TERM_RE = re.compile(
    r"(?P<sign>[+-]?)"
    r"(?:(?P<rat>\d+(?:/\d+)?)(?:\*sqrt\((?P<rad1>\d+)\))?"
    r"|sqrt\((?P<rad2>\d+)\))"
)


def parse_element(text: str, tower: FieldTower | None = None) -> FieldElement:
    """Parse `1/2 + 1/2*sqrt(6) - sqrt(2)` style literals, whitespace-insensitive."""
    s = re.sub(r"\s+", "", text)
    if not s:
        raise ValueError("empty element literal")
    terms: list[tuple[Fraction, int]] = []
    pos = 0
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == m.start():
            raise ValueError(f"bad element literal at {s[pos:]!r}")
        if pos > 0 and m.group("sign") == "":
            raise ValueError(f"missing +/- between terms in {text!r}")
        q = Fraction(m.group("rat")) if m.group("rat") else _ONE
        if m.group("sign") == "-":
            q = -q
        rad = m.group("rad1") or m.group("rad2")
        terms.append((q, int(rad) if rad else 1))
        pos = m.end()
    for _, d in terms:
        if d == 0:
            raise ValueError("sqrt(0) is not a valid term")
    if tower is None:
        tower = make_field([d for _, d in terms if d > 1])
    out = tower.zero()
    for q, d in terms:
        out = out + (tower.rational(q) if d == 1 else tower.sqrt(d) * q)
    return out


def element_literal(x: FieldElement) -> str:
    """Canonical literal, inverse of parse_element up to term ordering."""
    terms = x.canonical_terms()
    if not terms:
        return "0"
    parts = []
    for t, q in terms:
        if t == 1:
            body = str(q)
        elif q == 1:
            body = f"sqrt({t})"
        elif q == -1:
            body = f"-sqrt({t})"
        else:
            body = f"{q}*sqrt({t})"
        if parts and not body.startswith("-"):
            parts.append("+" + body)
        else:
            parts.append(body)
    return "".join(parts)
