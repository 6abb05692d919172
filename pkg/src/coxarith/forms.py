"""Diagonal quadratic forms over real multiquadratic towers.

A form is stored by its diagonal after exact congruence reduction of a
symmetric Gram matrix; the transformation is returned so callers can
re-check T^t G T = diag(D).  Isometry over the field is decided by the
local-global principle: rank, every real signature, the determinant
square class, and Hasse symbols at the finitely many places where the
(integrally rescaled) entries are non-units.

The transfer along a quadratic subextension K/F sends a rank-1 form <c>
to the rank-2 F-form with Gram [[v, u], [u, a*v]] where c = u + v*sqrt(a)
and a is the smallest squarefree generator of K over F; its determinant
is -Norm_{K/F}(c), so blocks never degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import fields, localfields
from .fields import Embedding, FieldElement, FieldTower, element_literal, sign_at

__all__ = [
    "QuadraticForm",
    "FormInvariants",
    "diagonalize",
    "signature_of_gram",
    "invariants",
    "signature_at",
    "transfer",
    "globally_isometric",
    "is_admissible",
    "cleared_entries",
]


class QuadraticForm:
    """A nondegenerate diagonal quadratic form <a_1,...,a_n> over a tower."""

    __slots__ = ("tower", "diagonal", "label")

    def __init__(self, tower: FieldTower, diagonal, label: str = ""):
        diag = tuple(tower.coerce(c) for c in diagonal)
        if not all(diag):
            raise ValueError("degenerate form")
        self.tower = tower
        self.diagonal = diag
        self.label = label

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def det(self) -> FieldElement:
        out = self.tower.one()
        for c in self.diagonal:
            out = out * c
        return out

    def scaled(self, c) -> "QuadraticForm":
        c = self.tower.coerce(c)
        return QuadraticForm(self.tower, [c * d for d in self.diagonal], self.label)

    def direct_sum(self, other: "QuadraticForm") -> "QuadraticForm":
        assert self.tower == other.tower
        return QuadraticForm(self.tower, self.diagonal + other.diagonal)

    def over(self, K: FieldTower) -> "QuadraticForm":
        """The same diagonal read over a larger tower."""
        return QuadraticForm(K, [K.coerce(c) for c in self.diagonal], self.label)

    def literals(self) -> list[str]:
        return [element_literal(c) for c in self.diagonal]

    def __eq__(self, other) -> bool:
        return (isinstance(other, QuadraticForm)
                and self.tower == other.tower and self.diagonal == other.diagonal)

    def __hash__(self) -> int:
        return hash((self.tower, self.diagonal))

    def __repr__(self) -> str:
        return "<" + ", ".join(self.literals()) + f"> over {self.tower}"


def _sym_diagonalize(rows: Sequence[Sequence], tower: FieldTower):
    """Exact congruence diagonalization; zero rows allowed (left as zeros)."""
    n = len(rows)
    A = [[tower.coerce(x) for x in row] for row in rows]
    for i in range(n):
        if len(A[i]) != n:
            raise ValueError("gram matrix is not square")
        for j in range(i):
            if A[i][j] != A[j][i]:
                raise ValueError("gram matrix is not symmetric")
    T = [[tower.rational(1 if i == j else 0) for j in range(n)] for i in range(n)]

    def swap(i, j):
        for t in range(n):
            A[t][i], A[t][j] = A[t][j], A[t][i]
        A[i], A[j] = A[j], A[i]
        for t in range(n):
            T[t][i], T[t][j] = T[t][j], T[t][i]

    def col_addmul(dst, src, fac):
        for t in range(n):
            A[t][dst] = A[t][dst] + fac * A[t][src]
        for t in range(n):
            A[dst][t] = A[dst][t] + fac * A[src][t]
        for t in range(n):
            T[t][dst] = T[t][dst] + fac * T[t][src]

    one = tower.one()
    for k in range(n):
        if not A[k][k]:
            piv = next((j for j in range(k + 1, n) if A[j][j]), None)
            if piv is not None:
                swap(k, piv)
            else:
                pair = next(((i, j) for i in range(k, n)
                             for j in range(i + 1, n) if A[i][j]), None)
                if pair is None:
                    break  # remaining block is identically zero
                i, j = pair
                col_addmul(i, j, one)  # picks up 2*A[i][j] on the diagonal
                if i != k:
                    swap(k, i)
        pivot = A[k][k]
        for j in range(k + 1, n):
            if A[k][j]:
                col_addmul(j, k, -(A[k][j] / pivot))
    return [A[i][i] for i in range(n)], T


def diagonalize(gram: Sequence[Sequence], tower: FieldTower):
    """(QuadraticForm, T) with T^t G T diagonal; raises on singular G."""
    diag, T = _sym_diagonalize(gram, tower)
    if not all(diag):
        raise ValueError("degenerate form")
    return QuadraticForm(tower, diag), T


def signature_of_gram(gram: Sequence[Sequence], tower: FieldTower,
                      sigma: Embedding | None = None) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a symmetric matrix at an embedding."""
    diag, _ = _sym_diagonalize(gram, tower)
    sigma = tower.identity_embedding if sigma is None else sigma
    pos = neg = zero = 0
    for c in diag:
        s = sign_at(c, sigma) if c else 0
        if s > 0:
            pos += 1
        elif s < 0:
            neg += 1
        else:
            zero += 1
    return pos, neg, zero


def signature_at(form: QuadraticForm, sigma: Embedding) -> tuple[int, int]:
    pos = neg = 0
    for c in form.diagonal:
        if sign_at(c, sigma) > 0:
            pos += 1
        else:
            neg += 1
    return pos, neg


@dataclass(frozen=True)
class FormInvariants:
    rank: int
    det: FieldElement
    signatures: tuple[tuple[int, int], ...]  # per embedding, in mask order

    def same_as(self, other: "FormInvariants") -> bool:
        if self.rank != other.rank or self.signatures != other.signatures:
            return False
        ok, _ = fields.is_square(self.det * other.det)
        return ok


def invariants(form: QuadraticForm) -> FormInvariants:
    sigs = tuple(signature_at(form, s) for s in form.tower.embeddings())
    return FormInvariants(form.rank, form.det(), sigs)


def cleared_entries(form: QuadraticForm) -> list[FieldElement]:
    """Entries rescaled by rational squares to integral, squarefree-content vectors."""
    return [fields.integral_rescale(c) for c in form.diagonal]


def transfer(form: QuadraticForm, F: FieldTower) -> QuadraticForm:
    """Scharlau transfer of a K-form to the index-2 subtower F."""
    K = form.tower
    if F == K or not (F.subgroup_classes <= K.subgroup_classes) \
            or F.degree * 2 != K.degree:
        raise ValueError("transfer target is not an index-2 subtower")
    a = min(K.subgroup_classes - F.subgroup_classes)
    root = K.sqrt(a)
    sigma = next(s for s in fields.fixing_embeddings(K, F) if not s.is_identity)
    half = Fraction(1, 2)
    n = 2 * form.rank
    G = [[F.zero() for _ in range(n)] for _ in range(n)]
    for i, c in enumerate(form.diagonal):
        cs = c.conjugate(sigma)
        u = ((c + cs) * half).express_in(F)
        v = ((c - cs) * half * root * Fraction(1, a)).express_in(F)
        G[2 * i][2 * i] = v
        G[2 * i][2 * i + 1] = u
        G[2 * i + 1][2 * i] = u
        G[2 * i + 1][2 * i + 1] = v * a
    diag, _ = _sym_diagonalize(G, F)
    assert all(diag), "transfer block degenerated"  # det of block i is -N(c_i) != 0
    return QuadraticForm(F, diag, label=f"transfer[sqrt({a})]")


def globally_isometric(f: QuadraticForm, g: QuadraticForm) -> bool:
    """K-isometry by rank, real signatures, det class, and local Hasse symbols."""
    if f.tower != g.tower:
        raise ValueError("forms live over different towers")
    K = f.tower
    if f.rank != g.rank:
        return False
    for sigma in K.embeddings():
        if signature_at(f, sigma) != signature_at(g, sigma):
            return False
    ok, _ = fields.is_square(f.det() * g.det())
    if not ok:
        return False
    cf = cleared_entries(f)
    cg = cleared_entries(g)
    for place in localfields.relevant_finite_places(K, cf + cg):
        if localfields.hasse_invariant(cf, place) != localfields.hasse_invariant(cg, place):
            return False
    return True


def is_admissible(form: QuadraticForm) -> bool:
    """Signature (n,1) at the identity embedding, definite at all others."""
    for sigma in form.tower.embeddings():
        pos, neg = signature_at(form, sigma)
        if sigma.is_identity:
            if neg != 1:
                return False
        elif pos and neg:
            return False
    return True
