"""Local arithmetic at the places of real multiquadratic fields.

For a tower K = Q(sqrt(d_1),...,sqrt(d_r)) and a rational prime p, the
completions of K above p are classified by the images of the radicand
square classes in Q_p* / (Q_p*)^2.  Each completion gets an integral
model: elements are vectors over the local radicand basis with integer
coordinates mod p^N, and every question (valuation, square class,
Hilbert symbol) is answered inside that model.

Square classes of a dyadic completion are computed by the quadratic
defect loop: a unit is reduced against 1 by repeated exact square
corrections until the obstruction is either an odd-valuation defect, an
unsolvable Artin-Schreier equation at the critical level 2e, or it
vanishes (a square).  Hilbert symbols are the F_2 pairing on the square
class group; the pairing matrix is discovered by enumerating norms from
each relevant quadratic extension and is validated internally (symmetry,
nondegeneracy, (x,-x)=1, and agreement with the closed formula over Q_p
for rational arguments).

Precision is an exponent N on p; every predicate either certifies from
the stored digits or raises the internal retry signal, after which the
model is rebuilt with more digits.  Nothing is ever decided by a float.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

from . import fields
from .fields import FieldElement, FieldTower, factorize, integral_rescale, sign_at

__all__ = [
    "Place",
    "real_places",
    "splitting",
    "hilbert_symbol_Q",
    "hilbert_symbol_local",
    "hasse_invariant",
    "is_hyperbolic",
    "relevant_finite_places",
    "square_class_vector",
    "local_audit",
]


class _Precision(Exception):
    """Internal: the stored p-adic digits cannot certify the answer."""


# -- rational Hilbert symbols ---------------------------------------------


def _split_val(q: Fraction, p: int) -> tuple[int, Fraction]:
    v, num, den = 0, q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


def _unit_mod8(u: Fraction) -> int:
    # den odd, den^2 = 1 mod 8, so num/den = num*den mod 8
    return (u.numerator * u.denominator) % 8


def _legendre_unit(u: Fraction, p: int) -> int:
    n = (u.numerator * u.denominator) % p
    return 1 if pow(n, (p - 1) // 2, p) == 1 else -1


def hilbert_symbol_Q(a, b, v="inf") -> int:
    """Hilbert symbol (a,b)_v over Q; v is a prime or "inf"."""
    a, b = Fraction(a), Fraction(b)
    if not a or not b:
        raise ZeroDivisionError("Hilbert symbol of 0")
    if v in ("inf", "real", None):
        return -1 if (a < 0 and b < 0) else 1
    p = int(v)
    va, ua = _split_val(a, p)
    vb, ub = _split_val(b, p)
    if p == 2:
        ea = 1 if _unit_mod8(ua) % 4 == 3 else 0
        eb = 1 if _unit_mod8(ub) % 4 == 3 else 0
        wa = 1 if _unit_mod8(ua) in (3, 5) else 0
        wb = 1 if _unit_mod8(ub) in (3, 5) else 0
        return -1 if (ea * eb + va * wb + vb * wa) % 2 else 1
    sign = 1
    if (va * vb) % 2 and p % 4 == 3:
        sign = -sign
    if vb % 2:
        sign *= _legendre_unit(ua, p)
    if va % 2:
        sign *= _legendre_unit(ub, p)
    return sign


# -- splitting of a prime in a tower --------------------------------------


def _qp_class(q: Fraction, p: int) -> tuple[int, int]:
    v, u = _split_val(q, p)
    if p == 2:
        return (v & 1, _unit_mod8(u))
    return (v & 1, _legendre_unit(u, p))


def _class_mul(c1: tuple, c2: tuple, p: int) -> tuple[int, int]:
    if p == 2:
        return ((c1[0] + c2[0]) & 1, (c1[1] * c2[1]) % 8)
    return ((c1[0] + c2[0]) & 1, c1[1] * c2[1])


class _Structure(NamedTuple):
    gens: tuple[int, ...]       # squarefree ints, a basis of the local classes
    gen_masks: tuple[int, ...]  # per tower radicand: subset of gens matching its class
    e: int
    f: int
    g: int
    place_masks: tuple[int, ...]  # one radicand sign mask per place above p


@lru_cache(maxsize=None)
def _local_structure(tower: FieldTower, p: int) -> _Structure:
    triv = _qp_class(Fraction(1), p)

    def cls(n: int) -> tuple[int, int]:
        return _qp_class(Fraction(n), p)

    chosen: list[int] = []
    span = {triv}
    for t in sorted(tower.subgroup_classes - {1}):
        c = cls(t)
        if c not in span:
            chosen.append(t)
            span |= {_class_mul(c, s, p) for s in span}
    m = len(chosen)
    size = 1 << m
    sub_cls = {}
    for mask in range(size):
        c = triv
        for j in range(m):
            if (mask >> j) & 1:
                c = _class_mul(c, cls(chosen[j]), p)
        sub_cls[mask] = c
    cls_to_mask = {c: mask for mask, c in sub_cls.items()}
    assert len(cls_to_mask) == size, "local class basis is dependent"
    gen_masks = tuple(cls_to_mask[cls(d)] for d in tower.radicands)
    dbar = set(cls_to_mask)
    if p == 2:
        f = 2 if (0, 5) in dbar else 1
        e = size // f
        assert e in (1, 2, 4)
    else:
        f = 2 if (0, -1) in dbar else 1
        e = 2 if any(v == 1 for v, _ in dbar) else 1
        assert e * f == size
    # Galois sign masks induced on the radicands by the local Galois group
    H = set()
    for tau in range(size):
        bits = 0
        for j, Sj in enumerate(gen_masks):
            if (Sj & tau).bit_count() & 1:
                bits |= 1 << j
        H.add(bits)
    assert len(H) == size
    reps = sorted({min(eps ^ h for h in H) for eps in range(1 << tower.r)})
    g = (1 << tower.r) // size
    assert len(reps) == g
    return _Structure(tuple(chosen), gen_masks, e, f, g, tuple(reps))


@dataclass(frozen=True)
class Place:
    """A place of a tower: a real embedding or a prime of the ring of integers."""

    tower: FieldTower
    kind: str  # "real" | "finite"
    p: int | None
    eps_mask: int  # sign choice per radicand selecting this place
    e: int = 1
    f: int = 1

    @property
    def degree(self) -> int:
        return self.e * self.f

    def __repr__(self) -> str:
        if self.kind == "real":
            return f"Place(real, {self.tower}, signs={self.eps_mask:b})"
        return f"Place({self.p}, {self.tower}, e={self.e}, f={self.f}, signs={self.eps_mask:b})"


def real_places(tower: FieldTower) -> tuple[Place, ...]:
    return tuple(Place(tower, "real", None, s.mask) for s in tower.embeddings())


@lru_cache(maxsize=None)
def splitting(tower: FieldTower, p: int) -> tuple[Place, ...]:
    """The places of the tower above p, one per local Galois orbit of sign masks."""
    st = _local_structure(tower, p)
    return tuple(Place(tower, "finite", p, eps, st.e, st.f) for eps in st.place_masks)


# -- square roots in Z_p ----------------------------------------------------


def _hensel_sqrt(q: Fraction, p: int, digits: int) -> tuple[int, int]:
    """q = p^(2k) u with u a square unit; returns (k, canonical sqrt of u mod p^digits).

    Canonical means stable under raising digits: for odd p the root with the
    smaller residue mod p, for p = 2 the digit-by-digit lift starting at 1.
    """
    v, u = _split_val(q, p)
    assert v % 2 == 0, "p-adic square root of odd valuation"
    mod = p**digits
    u_int = u.numerator % mod * pow(u.denominator, -1, mod) % mod
    if p == 2:
        assert u_int % 8 == 1, "2-adic unit is not a square"
        x = 1
        for k in range(3, digits):
            if (x * x - u_int) % (1 << (k + 1)):
                x += 1 << (k - 1)
        return v // 2, x % mod
    from sympy.ntheory.residue_ntheory import sqrt_mod

    r0 = sqrt_mod(u_int % p, p)
    assert r0 is not None, "p-adic unit is not a square"
    r0 = min(r0, p - r0)
    x, prec = r0, 1
    inv2 = pow(2, -1, mod)
    while prec < digits:
        prec = min(2 * prec, digits)
        mm = p**prec
        x = (x + u_int * pow(x, -1, mm)) % mm * inv2 % mm
    return v // 2, x % mod


# -- residue field F_2 / F_4 symbols ----------------------------------------
# syms are ints 0..3 meaning a + b*w with bit0 = a, bit1 = b and w^2 = w + 1.


def _f4_mul(x: int, y: int) -> int:
    a0, a1 = x & 1, x >> 1
    b0, b1 = y & 1, y >> 1
    c0 = (a0 & b0) ^ (a1 & b1)
    c1 = (a0 & b1) ^ (a1 & b0) ^ (a1 & b1)
    return c0 | (c1 << 1)


def _f4_sqrt(x: int) -> int:
    return _f4_mul(x, x)  # Frobenius is an involution on F_4


# -- the local model ---------------------------------------------------------

# An element is p^shift * sum coeffs[S] * beta_S with integer coeffs known
# mod p^prec.  Since every error term is an integer multiple of p^prec, sums
# and products of such elements are again exact mod the minimum prec; factoring
# p^t out of all coordinates trades t digits of precision for a shift, which
# keeps shifts (and coefficient sizes) bounded during nested constructions.
_Elt = tuple[int, tuple[int, ...], int]  # (shift, coeffs, prec)


class LocalModel:
    """Integral model of the completion of a tower at one rational prime."""

    def __init__(self, tower: FieldTower, p: int, digits: int):
        self.tower = tower
        self.p = p
        self.N = digits
        self.mod = p**digits
        self._pow_cache: dict[int, int] = {}
        st = _local_structure(tower, p)
        self.gens = st.gens
        self.m = len(st.gens)
        self.size = 1 << self.m
        bp = []
        for mask in range(self.size):
            prod = 1
            for j in range(self.m):
                if (mask >> j) & 1:
                    prod *= self.gens[j]
            bp.append(prod)
        self.bprod = tuple(bp)
        self.one = self.mrat(1)
        self.omega: _Elt | None = None
        if p == 2:
            self._build_dyadic()
        else:
            self._build_odd()
        assert self.e == st.e and self.f == st.f
        self.pi_inv = self.inv(self.pi)
        self._pi_pows: dict[int, _Elt] = {0: self.one, 1: self.pi, -1: self.pi_inv}
        assert self.val(self.pi) == 1
        assert self.val(self.mrat(p)) == self.e
        if p == 2:
            self._delta_and_unit_gens()
        self._build_matrix()
        self._build_embedding(st)
        self._vec_cache: dict[tuple[int, FieldElement], int] = {}

    # -- element arithmetic --------------------------------------------

    def _pp(self, k: int) -> int:
        got = self._pow_cache.get(k)
        if got is None:
            got = self.p**k
            self._pow_cache[k] = got
        return got

    def _extract(self, s: int, cs: list[int], prec: int) -> _Elt:
        if prec < 16:
            raise _Precision("element precision exhausted")
        p = self.p
        if any(c % p for c in cs):
            return (s, tuple(cs), prec)
        if not any(cs):
            return (s, tuple(cs), prec)
        t = prec
        for c in cs:
            if c:
                w = 0
                while c % p == 0:
                    c //= p
                    w += 1
                t = min(t, w)
        if t >= prec:
            # indistinguishable from zero at this precision: keep as stored zero
            return (s, tuple(0 for _ in cs), prec)
        mod = self._pp(prec - t)
        return (s + t, tuple((c // self._pp(t)) % mod for c in cs), prec - t)

    def mrat(self, q) -> _Elt:
        q = Fraction(q)
        zeros = (0,) * (self.size - 1)
        if not q:
            return (0, (0,) + zeros, self.N)
        v, u = _split_val(q, self.p)
        c = u.numerator % self.mod * pow(u.denominator, -1, self.mod) % self.mod
        return (v, (c,) + zeros, self.N)

    def basis_elt(self, mask: int) -> _Elt:
        return (0, tuple(1 if S == mask else 0 for S in range(self.size)), self.N)

    def madd(self, x: _Elt, y: _Elt) -> _Elt:
        sx, cx, px = x
        sy, cy, py = y
        s = min(sx, sy)
        prec = min(px, py)
        mod = self._pp(prec)
        mx = self._pp(sx - s)
        my = self._pp(sy - s)
        return self._extract(s, [(a * mx + b * my) % mod for a, b in zip(cx, cy)], prec)

    def mneg(self, x: _Elt) -> _Elt:
        mod = self._pp(x[2])
        return (x[0], tuple(-c % mod for c in x[1]), x[2])

    def msub(self, x: _Elt, y: _Elt) -> _Elt:
        return self.madd(x, self.mneg(y))

    def mmul(self, x: _Elt, y: _Elt) -> _Elt:
        sx, cx, px = x
        sy, cy, py = y
        prec = min(px, py)
        mod = self._pp(prec)
        out = [0] * self.size
        for S, a in enumerate(cx):
            if a:
                for T, b in enumerate(cy):
                    if b:
                        out[S ^ T] = (out[S ^ T] + a * b * self.bprod[S & T]) % mod
        return self._extract(sx + sy, out, prec)

    def conj(self, x: _Elt, mask: int) -> _Elt:
        s, cs, prec = x
        mod = self._pp(prec)
        return (s, tuple(c if (S & mask).bit_count() % 2 == 0 else -c % mod
                         for S, c in enumerate(cs)), prec)

    def npow(self, x: _Elt, n: int) -> _Elt:
        out, base = self.one, x
        while n:
            if n & 1:
                out = self.mmul(out, base)
            base = self.mmul(base, base)
            n >>= 1
        return out

    def inv(self, x: _Elt) -> _Elt:
        prod = None
        for mask in range(1, self.size):
            c = self.conj(x, mask)
            prod = c if prod is None else self.mmul(prod, c)
        n = x if prod is None else self.mmul(x, prod)
        sn, cn, pn = n
        guard = self._pp(pn // 2)
        if any(c % guard for c in cn[1:]):
            raise _Precision("inverse: norm has irrational residue")
        c0 = cn[0]
        if c0 % guard == 0:
            raise _Precision("inverse of a (nearly) zero element")
        w = 0
        while c0 % self.p == 0:
            c0 //= self.p
            w += 1
        scale: _Elt = (-sn - w, ((pow(c0, -1, self._pp(pn - w))),) + (0,) * (self.size - 1),
                       pn - w)
        return scale if prod is None else self.mmul(prod, scale)

    def pi_pow(self, k: int) -> _Elt:
        got = self._pi_pows.get(k)
        if got is None:
            got = self.npow(self.pi, k) if k >= 0 else self.npow(self.pi_inv, -k)
            self._pi_pows[k] = got
        return got

    @staticmethod
    def _pow_of(model: "LocalModel", x: _Elt, k: int) -> _Elt:
        return model.npow(x, k)

    # -- valuations ----------------------------------------------------

    def _norm_fold(self, x: _Elt, nbits: int) -> tuple[int, int, int]:
        cur = x
        for k in range(nbits):
            cur = self.mmul(cur, self.conj(cur, 1 << k))
        s, cs, prec = cur
        guard = self._pp(prec // 2)
        if any(c % guard for c in cs[1:]):
            raise _Precision("norm has irrational residue")
        return s, cs[0], prec

    def val(self, x: _Elt, nbits: int | None = None, f: int | None = None) -> int:
        nbits = self.m if nbits is None else nbits
        f = self.f if f is None else f
        s, c0, prec = self._norm_fold(x, nbits)
        if c0 == 0:
            raise _Precision("valuation of a (nearly) zero element")
        w = 0
        while c0 % self.p == 0:
            c0 //= self.p
            w += 1
        if w > prec // 2:
            raise _Precision("valuation beyond certified digits")
        total = s + w  # the fold already accumulated the shifts of all conjugates
        assert total % f == 0, "norm valuation not divisible by residue degree"
        return total // f

    def is_val_ge(self, x: _Elt, t: int, nbits: int | None = None,
                  f: int | None = None) -> bool:
        # the p-shift alone certifies v_pi(x) >= e*shift >= shift; this also
        # covers near-cancelled elements whose relative precision is too low
        # to norm-fold (exact cancellations leave a single junk top digit)
        if x[0] >= t:
            return True
        nbits = self.m if nbits is None else nbits
        f = self.f if f is None else f
        s, c0, prec = self._norm_fold(x, nbits)
        need = t * f - s
        if need <= 0:
            return True
        if need > prec:
            raise _Precision("threshold beyond certified digits")
        return c0 % self._pp(need) == 0

    # -- residue field -------------------------------------------------

    def _rep(self, sym: int, omega: _Elt | None) -> _Elt:
        out = self.mrat(sym & 1)
        if sym >> 1:
            assert omega is not None
            out = self.madd(out, omega)
        return out

    def _residue(self, x: _Elt, nbits: int | None = None, f: int | None = None,
                 omega: _Elt | None = None) -> int:
        f = self.f if f is None else f
        omega = self.omega if omega is None else omega
        for sym in range(1, 1 << f):
            if self.is_val_ge(self.msub(x, self._rep(sym, omega)), 1, nbits, f):
                return sym
        raise _Precision("unit residue unresolved")

    # -- dyadic construction --------------------------------------------

    def _reduce_defect(self, u: _Elt, nbits: int, e: int, f: int,
                       pi: _Elt, omega: _Elt | None):
        """Multiply u by squares toward 1.  Returns (kind, w, y) with
        u*y^2 = 1 + pi^w * eps and kind in {"square", "odd", "unram"}."""
        one = self.one
        y = one
        cur = u
        r = self._residue(cur, nbits, f, omega)
        if r != 1:
            si = self.inv(self._rep(_f4_sqrt(r), omega))
            y = self.mmul(y, si)
            cur = self.mmul(cur, self.mmul(si, si))
        pinv = self.inv(pi)
        c2 = None
        for _ in range(4 * e + 12):
            d = self.msub(cur, one)
            if self.is_val_ge(d, 2 * e + 1, nbits, f):
                return ("square", None, y)
            w = self.val(d, nbits, f)
            eps = self.mmul(d, self.npow(pinv, w))
            if w & 1:
                return ("odd", w, y)
            ebar = self._residue(eps, nbits, f, omega)
            if w < 2 * e:
                s = self._rep(_f4_sqrt(ebar), omega)
                corr = self.madd(one, self.mmul(self.npow(pi, w // 2), s))
            else:
                if c2 is None:
                    c2 = self._residue(self.mmul(self.mrat(2), self.npow(pinv, e)),
                                       nbits, f, omega)
                sols = [s for s in range(1, 1 << f)
                        if _f4_mul(s, s) ^ _f4_mul(c2, s) == ebar]
                if not sols:
                    return ("unram", w, y)
                corr = self.madd(one, self.mmul(self.npow(pi, e),
                                                self._rep(sols[0], omega)))
            ci = self.inv(corr)
            y = self.mmul(y, ci)
            cur = self.mmul(cur, self.mmul(ci, ci))
        raise _Precision("defect loop did not settle")

    def _build_dyadic(self) -> None:
        e, f = 1, 1
        pi = self.mrat(2)
        omega = None
        for j, c in enumerate(self.gens):
            t = e if c % 2 == 0 else 0
            beta = self.basis_elt(1 << j)
            if t & 1:
                pi = self.mmul(beta, self.npow(self.inv(pi), (t - 1) // 2))
                e *= 2
                continue
            u = self.mmul(self.mrat(c), self.npow(self.inv(pi), t))
            kind, w, y = self._reduce_defect(u, j, e, f, pi, omega)
            gamma = self.mmul(beta, self.npow(self.inv(pi), t // 2))
            eta = self.mmul(y, gamma)
            if kind == "odd":
                pi = self.mmul(self.msub(eta, self.one),
                               self.npow(self.inv(pi), (w - 1) // 2))
                e *= 2
            elif kind == "unram":
                omega = self.mmul(self.msub(eta, self.one), self.npow(self.inv(pi), e))
                f *= 2
                rel = self.msub(self.mmul(omega, omega), self.madd(omega, self.one))
                assert self.is_val_ge(rel, 1, j + 1, f), \
                    "residue generator does not satisfy w^2 = w + 1"
            else:
                raise AssertionError("locally square radicand in the local basis")
        self.e, self.f, self.pi, self.omega = e, f, pi, omega

    def _build_odd(self) -> None:
        st = _local_structure(self.tower, self.p)
        self.e, self.f = st.e, st.f
        if self.e == 2:
            j = next(i for i, g in enumerate(self.gens) if g % self.p == 0)
            self.pi = self.basis_elt(1 << j)
        else:
            self.pi = self.mrat(self.p)
        if self.f == 1:
            n0 = next(n for n in range(2, self.p) if pow(n, (self.p - 1) // 2, self.p) != 1)
            self.u0 = self.mrat(n0)
        else:
            self.u0 = next(x for x in self._unit_pool() if not self._unit_is_square(x))

    def _unit_pool(self):
        for j, g in enumerate(self.gens):
            if g % self.p:
                yield self.basis_elt(1 << j)
        for j, g in enumerate(self.gens):
            if g % self.p:
                for k in range(1, self.p):
                    yield self.madd(self.basis_elt(1 << j), self.mrat(k))
        rnd = random.Random(48823)
        for _ in range(256):
            yield (0, tuple(rnd.randrange(self.p) for _ in range(self.size)), self.N)
        raise RuntimeError("no unit non-square found")

    def _unit_is_square(self, x: _Elt) -> bool:
        y = self.npow(x, (self.p**self.f - 1) // 2)
        if self.is_val_ge(self.msub(y, self.one), 1):
            return True
        assert self.is_val_ge(self.madd(y, self.one), 1), "unit power not +-1 mod P"
        return False

    # -- square class basis and vectors ---------------------------------

    def _delta_and_unit_gens(self) -> None:
        e, f = self.e, self.f
        c2 = self._residue(self.mmul(self.mrat(2), self.pi_pow(-e)))
        self._c2 = c2
        image = {_f4_mul(s, s) ^ _f4_mul(c2, s) for s in range(1 << f)}
        rho = min(s for s in range(1, 1 << f) if s not in image)
        delta = self.madd(self.one, self.mmul(self.mrat(4), self._rep(rho, self.omega)))
        kind, w, _ = self._reduce_defect(delta, self.m, e, f, self.pi, self.omega)
        assert kind == "unram" and w == 2 * e, "unramified unit candidate failed"
        gens: list[tuple[str, _Elt]] = [("D", delta)]
        index: dict[tuple[int, int], int] = {}
        for w in range(1, 2 * e, 2):
            for sym in (1,) if f == 1 else (1, 2):
                elt = self.madd(self.one, self.mmul(self.pi_pow(w), self._rep(sym, self.omega)))
                index[(w, sym)] = len(gens)
                gens.append((f"1+pi^{w}" + ("" if sym == 1 else "*w"), elt))
        assert len(gens) == e * f + 1
        self.unit_gens = gens
        self._gen_index = index
        self._gen_inv = [self.inv(g) for _, g in gens]

    def _expression_bits(self, u: _Elt) -> int:
        """Coordinates of a unit over [delta, 1+pi^w*t ...], as a bitmask."""
        bits = 0
        one = self.one
        e, f = self.e, self.f
        r = self._residue(u)
        if r != 1:
            si = self.inv(self._rep(_f4_sqrt(r), self.omega))
            u = self.mmul(u, self.mmul(si, si))
        for _ in range(4 * e + 16):
            d = self.msub(u, one)
            if self.is_val_ge(d, 2 * e + 1):
                return bits
            w = self.val(d)
            eps = self.mmul(d, self.pi_pow(-w))
            ebar = self._residue(eps)
            if w & 1:
                for sym, on in ((1, ebar & 1), (2, ebar >> 1)):
                    if on:
                        idx = self._gen_index[(w, sym)]
                        bits ^= 1 << idx
                        u = self.mmul(u, self._gen_inv[idx])
            elif w < 2 * e:
                s = self._rep(_f4_sqrt(ebar), self.omega)
                ci = self.inv(self.madd(one, self.mmul(self.pi_pow(w // 2), s)))
                u = self.mmul(u, self.mmul(ci, ci))
            else:
                sols = [s for s in range(1, 1 << f)
                        if _f4_mul(s, s) ^ _f4_mul(self._c2, s) == ebar]
                if sols:
                    ci = self.inv(self.madd(one, self.mmul(self.pi_pow(e),
                                                           self._rep(sols[0], self.omega))))
                    u = self.mmul(u, self.mmul(ci, ci))
                else:
                    bits ^= 1
                    u = self.mmul(u, self._gen_inv[0])
        raise _Precision("square class expression did not settle")

    def vec_int(self, x: _Elt) -> int:
        """Square class of x as a bitmask over [pi] + unit generators."""
        v = self.val(x)
        u = self.mmul(x, self.pi_pow(-v))
        if self.p == 2:
            return (v & 1) | (self._expression_bits(u) << 1)
        b = 0 if self._unit_is_square(u) else 1
        return (v & 1) | (b << 1)

    @property
    def dim(self) -> int:
        return 1 + len(self.unit_gens) if self.p == 2 else 2

    # -- pairing matrix --------------------------------------------------

    def pair_bits(self, va: int, vb: int) -> int:
        acc, x, i = 0, va, 0
        while x:
            if x & 1:
                acc ^= (self.M_rows[i] & vb).bit_count() & 1
            x >>= 1
            i += 1
        return acc

    def _norm_pairs(self):
        base = [self.one, self.pi, self.madd(self.one, self.pi), self.pi_pow(2),
                self.mrat(3), self.mrat(5), self.mrat(7), self.mrat(-1)]
        for j in range(self.m):
            base.append(self.basis_elt(1 << j))
        if self.omega is not None:
            base.append(self.omega)
            base.append(self.madd(self.one, self.omega))
        yield from itertools.product(base, repeat=2)
        rnd = random.Random(770231)
        while True:
            s = (0, tuple(rnd.randrange(64) for _ in range(self.size)), self.N)
            t = (0, tuple(rnd.randrange(64) for _ in range(self.size)), self.N)
            yield s, t

    def _char_row(self, b: _Elt, dim: int) -> int:
        """The character annihilating the norms of the extension by sqrt(b)."""
        pivots: dict[int, int] = {}
        needed = dim - 1
        for s, t in itertools.islice(self._norm_pairs(), 1200):
            n = self.msub(self.mmul(s, s), self.mmul(b, self.mmul(t, t)))
            if not any(n[1]):
                continue
            x = self.vec_int(n)
            while x:
                h = x.bit_length() - 1
                if h not in pivots:
                    break
                x ^= pivots[h]
            if x:
                pivots[x.bit_length() - 1] = x
                if len(pivots) == needed:
                    break
        if len(pivots) != needed:
            raise RuntimeError("norm group rank not reached")
        cands = [c for c in range(1, 1 << dim)
                 if all((c & r).bit_count() % 2 == 0 for r in pivots.values())]
        assert len(cands) == 1, "norm group annihilator not unique"
        return cands[0]

    def _build_matrix(self) -> None:
        if self.p != 2:
            m00 = 0 if self._unit_is_square(self.mrat(-1)) else 1
            self.M_rows = [m00 | 2, 1]
            self.basis_names = ["pi", "u"]
            self._validate_matrix()
            return
        dim = self.dim
        rows = [0] * dim
        rows[1] = 1  # the unramified unit pairs only with odd valuations
        rows[0] = self._char_row(self.pi, dim)
        for i, (_, g) in enumerate(self.unit_gens):
            if i > 0:
                rows[1 + i] = self._char_row(g, dim)
        self.M_rows = rows
        self.basis_names = ["pi"] + [name for name, _ in self.unit_gens]
        self._validate_matrix()

    def _validate_matrix(self) -> None:
        rows, dim = self.M_rows, self.dim
        for i in range(dim):
            for j in range(i):
                assert (rows[i] >> j) & 1 == (rows[j] >> i) & 1, "pairing not symmetric"
        pivots: dict[int, int] = {}
        for r in rows:
            x = r
            while x:
                h = x.bit_length() - 1
                if h not in pivots:
                    pivots[h] = x
                    break
                x ^= pivots[h]
        assert len(pivots) == dim, "pairing is degenerate"
        # (x, -x) = 1 on every basis element
        basis = [self.pi] + ([g for _, g in self.unit_gens] if self.p == 2 else [self.u0])
        for b in basis:
            vb = self.vec_int(b)
            vnb = self.vec_int(self.mneg(b))
            assert self.pair_bits(vb, vnb) == 0, "(x,-x) != 1 in local pairing"
        # rational arguments must agree with the closed formula over Q_p
        deg = self.e * self.f
        for a, b in ((-1, -1), (-1, 2), (2, 2), (2, 5), (3, 5), (2, 3), (3, 7)):
            got = -1 if self.pair_bits(self.vec_int(self.mrat(a)),
                                       self.vec_int(self.mrat(b))) else 1
            assert got == hilbert_symbol_Q(a, b, self.p) ** deg, \
                "local pairing disagrees with rational Hilbert symbol"

    # -- embedding of the global field -----------------------------------

    def _build_embedding(self, st: _Structure) -> None:
        self.phi_rad: list[_Elt] = []
        for j, d in enumerate(self.tower.radicands):
            mask = st.gen_masks[j]
            qv = Fraction(d)
            B = self.one
            for g in range(self.m):
                if (mask >> g) & 1:
                    qv *= self.gens[g]
                    B = self.mmul(B, self.basis_elt(1 << g))
            k, root = _hensel_sqrt(qv, self.p, self.N)
            root_elt: _Elt = (k, (root,) + (0,) * (self.size - 1), self.N)
            phi = self.mmul(root_elt, self.inv(B))
            diff = self.msub(self.mmul(phi, phi), self.mrat(d))
            assert self.is_val_ge(diff, max(4, self.N // 4)), "radicand image check failed"
            self.phi_rad.append(phi)
        self._phi_alpha: dict[int, _Elt] = {0: self.one}

    def _phi(self, S: int) -> _Elt:
        got = self._phi_alpha.get(S)
        if got is None:
            j = (S & -S).bit_length() - 1
            got = self.mmul(self._phi(S & (S - 1)), self.phi_rad[j])
            self._phi_alpha[S] = got
        return got

    def embed(self, x: FieldElement, eps_mask: int) -> _Elt:
        acc = self.mrat(0)
        for S, c in enumerate(x.coeffs):
            if c:
                term = self.mmul(self.mrat(c), self._phi(S))
                if (S & eps_mask).bit_count() & 1:
                    term = self.mneg(term)
                acc = self.madd(acc, term)
        return acc

    def vec_of_element(self, x: FieldElement, eps_mask: int) -> int:
        key = (eps_mask, x)
        got = self._vec_cache.get(key)
        if got is None:
            got = self.vec_int(self.embed(x, eps_mask))
            self._vec_cache[key] = got
        return got


# -- model cache with precision retry ----------------------------------------

_BASE_DIGITS = 256
_ODD_DIGITS = 64
_MODELS: dict[tuple[FieldTower, int], LocalModel] = {}


def _model(tower: FieldTower, p: int) -> LocalModel:
    key = (tower, p)
    md = _MODELS.get(key)
    if md is None:
        digits = _BASE_DIGITS if p == 2 else _ODD_DIGITS
        for _ in range(6):
            try:
                md = LocalModel(tower, p, digits)
                break
            except _Precision:
                digits *= 2
        else:
            raise RuntimeError(f"cannot build local model of {tower} at {p}")
        _MODELS[key] = md
    return md


def _with_model(tower: FieldTower, p: int, fn):
    for _ in range(8):
        md = _model(tower, p)
        try:
            return fn(md)
        except _Precision:
            del _MODELS[(tower, p)]
            _MODELS[(tower, p)] = LocalModel(tower, p, md.N * 2)
    raise RuntimeError(f"p-adic precision exhausted for {tower} at {p}")


def square_class_vector(x: FieldElement, place: Place) -> tuple[int, ...]:
    """Coordinates of x over the local square class basis at a finite place."""
    assert place.kind == "finite"
    x = place.tower.coerce(x)
    if not x:
        raise ZeroDivisionError("square class of 0")
    bits = _with_model(place.tower, place.p,
                       lambda md: md.vec_of_element(x, place.eps_mask))
    dim = _model(place.tower, place.p).dim
    return tuple((bits >> i) & 1 for i in range(dim))


def _vec_bits(x: FieldElement, place: Place) -> int:
    return _with_model(place.tower, place.p,
                       lambda md: md.vec_of_element(x, place.eps_mask))


def hilbert_symbol_local(a, b, place: Place) -> int:
    """Hilbert symbol (a,b) at a place of the tower."""
    K = place.tower
    a = K.coerce(a)
    b = K.coerce(b)
    if not a or not b:
        raise ZeroDivisionError("Hilbert symbol of 0")
    if place.kind == "real":
        sigma = K.embeddings()[place.eps_mask]
        return -1 if (sign_at(a, sigma) < 0 and sign_at(b, sigma) < 0) else 1
    va = _vec_bits(integral_rescale(a), place)
    vb = _vec_bits(integral_rescale(b), place)
    md = _model(K, place.p)
    out = -1 if md.pair_bits(va, vb) else 1
    if __debug__ and a.is_rational and b.is_rational:
        expect = hilbert_symbol_Q(a.rational_value(), b.rational_value(),
                                  place.p) ** place.degree
        assert out == expect, "local symbol disagrees with rational formula"
    return out


def hasse_invariant(form, place: Place) -> int:
    """Hasse symbol prod_{i<j} (a_i, a_j) of a diagonal form at a place."""
    entries = list(form.diagonal) if hasattr(form, "diagonal") else list(form)
    K = place.tower
    entries = [K.coerce(c) for c in entries]
    if place.kind == "real":
        neg = sum(1 for c in entries if sign_at(c, K.embeddings()[place.eps_mask]) < 0)
        return -1 if (neg * (neg - 1) // 2) % 2 else 1
    md = _model(K, place.p)
    bit, pre = 0, 0
    for c in entries:
        v = _vec_bits(integral_rescale(c), place)
        bit ^= md.pair_bits(pre, v)
        pre ^= v
    return -1 if bit else 1


def relevant_finite_places(tower: FieldTower, elements: Iterable) -> tuple[Place, ...]:
    """Places above 2 and above every prime dividing a norm of an entry.

    At all other finite places the entries are units, so Hasse symbols of
    diagonal forms in the entries are trivially +1 there.
    """
    primes = {2}
    for c in elements:
        c = tower.coerce(c)
        if not c:
            raise ZeroDivisionError("degenerate entry")
        n = integral_rescale(c).rational_norm()
        assert n.denominator == 1
        primes.update(p for p, _ in factorize(int(n)))
    out: list[Place] = []
    for p in sorted(primes):
        out.extend(splitting(tower, p))
    return tuple(out)


def is_hyperbolic(form) -> bool:
    """Whether a nondegenerate diagonal form is a sum of hyperbolic planes."""
    K = form.tower
    diag = list(form.diagonal)
    n = len(diag)
    if n % 2:
        return False
    if n == 0:
        return True
    m = n // 2
    for sigma in K.embeddings():
        neg = sum(1 for c in diag if sign_at(c, sigma) < 0)
        if neg != m:
            return False
    det = K.one()
    for c in diag:
        det = det * c
    ok, _ = fields.is_square(det * ((-1) ** m))
    if not ok:
        return False
    t = (m * (m - 1) // 2) % 2
    minus_one = K.rational(-1)
    for place in relevant_finite_places(K, diag):
        want = hilbert_symbol_local(minus_one, minus_one, place) if t else 1
        if hasse_invariant(diag, place) != want:
            return False
    return True


def local_audit(tower: FieldTower, p: int) -> dict:
    """JSON-able description of the splitting and symbol tables above p."""
    st = _local_structure(tower, p)
    md = _model(tower, p)
    places = [{"e": pl.e, "f": pl.f,
               "signs": [-1 if (pl.eps_mask >> j) & 1 else 1 for j in range(tower.r)]}
              for pl in splitting(tower, p)]
    return {
        "p": p,
        "field": str(tower),
        "local_class_basis": list(st.gens),
        "places": places,
        "square_class_basis": list(md.basis_names),
        "pairing_matrix": [[(r >> j) & 1 for j in range(md.dim)] for r in md.M_rows],
    }
