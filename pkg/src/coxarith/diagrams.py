"""Coxeter diagrams of hyperbolic reflection polytopes.

File format (.cox): a header followed by one line per edge.

    # comment
    dim 5
    vertices 6
    edge 1 2 3          label m: dihedral angle pi/m
    edge 2 3 inf        parallel hyperplanes (Gram entry -1)
    edge 3 4 w 1/2+1/2*sqrt(6)   divergent hyperplanes (Gram entry -w, w > 1)

Vertices are 1..r in declaration order; omitted pairs are right angles
(label 2).  Weight expressions are sums of rational multiples of sqrt(n)
with cospi(m) allowed as a term.  Supported labels are m in
{2, 3, 4, 5, 6, 12}: exactly those whose cosine lies in a real
multiquadratic field.

The trace field of a diagram is generated by the squared Gram entries
and the products of entries around simple cycles.  The ambient form is
the Gram matrix of a full-rank subset of the (rescaled) normal vectors,
written over the trace field and diagonalized there.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import isqrt

from . import fields, forms
from .fields import FieldElement, FieldTower, make_field, squarefree_part
from .forms import QuadraticForm

__all__ = [
    "CoxeterDiagram",
    "DiagramError",
    "UnsupportedLabelError",
    "SignatureError",
    "parse_diagram",
    "load_diagram",
    "simple_cycles",
    "trace_field_of",
    "ambient_form",
]


class DiagramError(ValueError):
    """Malformed diagram text or structure."""


class UnsupportedLabelError(DiagramError):
    """Edge label whose cosine is not multiquadratic."""


class SignatureError(ValueError):
    """Gram matrix is not of hyperbolic signature (n,1)."""


# cos(pi/m) as {squarefree class: coefficient}, for the multiquadratic labels
_COS_PAIRS: dict[int, dict[int, Fraction]] = {
    2: {},
    3: {1: Fraction(1, 2)},
    4: {2: Fraction(1, 2)},
    5: {1: Fraction(1, 4), 5: Fraction(1, 4)},
    6: {3: Fraction(1, 2)},
    12: {6: Fraction(1, 4), 2: Fraction(1, 4)},
}

_WTERM = re.compile(
    r"(?:(?P<coef>\d+(?:/\d+)?)\*)?"
    r"(?:sqrt\((?P<root>\d+)\)|cospi\((?P<cos>\d+)\))"
    r"|(?P<rat>\d+(?:/\d+)?)"
)


def _acc_add(acc: dict[int, Fraction], cls: int, q: Fraction) -> None:
    acc[cls] = acc.get(cls, Fraction(0)) + q


def _parse_weight(expr: str) -> dict[int, Fraction]:
    """Weight expression -> {squarefree class: coefficient}."""
    s = expr.replace(" ", "")
    if not s:
        raise DiagramError("empty weight expression")
    acc: dict[int, Fraction] = {}
    pos = 0
    first = True
    while pos < len(s):
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise DiagramError(f"missing sign in weight expression: {expr!r}")
        m = _WTERM.match(s, pos)
        if not m or m.start() != pos:
            raise DiagramError(f"bad weight expression: {expr!r}")
        pos = m.end()
        first = False
        if m["rat"] is not None:
            _acc_add(acc, 1, sign * Fraction(m["rat"]))
            continue
        coef = sign * Fraction(m["coef"]) if m["coef"] else Fraction(sign)
        if m["root"] is not None:
            n = int(m["root"])
            if n <= 0:
                raise DiagramError("sqrt of a nonpositive integer in weight")
            t = squarefree_part(n)
            _acc_add(acc, t, coef * isqrt(n // t))
        else:
            mm = int(m["cos"])
            pairs = _COS_PAIRS.get(mm)
            if pairs is None:
                raise UnsupportedLabelError("unsupported label: non-multiquadratic cosine")
            for cls, q in pairs.items():
                _acc_add(acc, cls, coef * q)
    return acc


class CoxeterDiagram:
    """Parsed diagram: vertices 1..size, Gram entries over a common tower."""

    __slots__ = ("name", "dim", "size", "tower", "entries")

    def __init__(self, name: str, dim: int, size: int, tower: FieldTower,
                 entries: dict[tuple[int, int], FieldElement]):
        self.name = name
        self.dim = dim
        self.size = size
        self.tower = tower
        self.entries = entries

    def gram_rows(self) -> list[list[FieldElement]]:
        one, zero = self.tower.one(), self.tower.zero()
        G = [[zero] * self.size for _ in range(self.size)]
        for i in range(self.size):
            G[i][i] = one
        for (i, j), a in self.entries.items():
            G[i - 1][j - 1] = a
            G[j - 1][i - 1] = a
        return G

    def neighbors(self, v: int) -> list[int]:
        out = []
        for (i, j) in self.entries:
            if i == v:
                out.append(j)
            elif j == v:
                out.append(i)
        return sorted(out)

    def relabeled(self, perm: dict[int, int] | list[int]) -> "CoxeterDiagram":
        """New diagram with vertex v renamed to perm[v]; same geometry."""
        if isinstance(perm, list):
            perm = {v: perm[v - 1] for v in range(1, self.size + 1)}
        assert sorted(perm.values()) == list(range(1, self.size + 1))
        entries = {}
        for (i, j), a in self.entries.items():
            x, y = perm[i], perm[j]
            entries[(min(x, y), max(x, y))] = a
        return CoxeterDiagram(self.name + "-relabeled", self.dim, self.size,
                              self.tower, entries)

    def __repr__(self) -> str:
        return (f"CoxeterDiagram({self.name}, dim={self.dim}, "
                f"vertices={self.size}, edges={len(self.entries)})")


def parse_diagram(text: str, name: str = "diagram") -> CoxeterDiagram:
    dim = size = None
    raw_edges: list[tuple[int, int, dict[int, Fraction], bool]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "dim":
            if dim is not None or len(parts) != 2 or not parts[1].isdigit():
                raise DiagramError(f"line {lineno}: bad dim header")
            dim = int(parts[1])
        elif kind == "vertices":
            if size is not None or len(parts) != 2 or not parts[1].isdigit():
                raise DiagramError(f"line {lineno}: bad vertices header")
            size = int(parts[1])
        elif kind == "edge":
            if dim is None or size is None:
                raise DiagramError(f"line {lineno}: edge before dim/vertices headers")
            if len(parts) < 4:
                raise DiagramError(f"line {lineno}: edge needs two vertices and a label")
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise DiagramError(f"line {lineno}: bad vertex index") from None
            if not (1 <= i <= size and 1 <= j <= size) or i == j:
                raise DiagramError(f"line {lineno}: vertex index out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DiagramError(f"line {lineno}: duplicate edge {key}")
            seen.add(key)
            label = parts[3]
            if label == "w":
                if len(parts) < 5:
                    raise DiagramError(f"line {lineno}: weighted edge needs an expression")
                acc = _parse_weight("".join(parts[4:]))
                raw_edges.append((key[0], key[1], acc, True))
            elif label == "inf":
                raw_edges.append((key[0], key[1], {1: Fraction(-1)}, False))
            else:
                if not label.isdigit():
                    raise DiagramError(f"line {lineno}: bad edge label {label!r}")
                m = int(label)
                if m < 2:
                    raise DiagramError(f"line {lineno}: bad edge label {m}")
                pairs = _COS_PAIRS.get(m)
                if pairs is None:
                    raise UnsupportedLabelError("unsupported label: non-multiquadratic cosine")
                if pairs:  # m = 2 is a right angle: no entry
                    acc = {cls: -q for cls, q in pairs.items()}
                    raw_edges.append((key[0], key[1], acc, False))
            if len(parts) > 4 and label != "w":
                raise DiagramError(f"line {lineno}: trailing tokens after label")
        else:
            raise DiagramError(f"line {lineno}: unknown directive {kind!r}")
    if dim is None or size is None:
        raise DiagramError("missing dim/vertices headers")
    if dim < 1:
        raise DiagramError("dim must be positive")

    classes = sorted({cls for _, _, acc, _ in raw_edges for cls, q in acc.items()
                      if q and cls != 1})
    tower = make_field(classes)
    entries: dict[tuple[int, int], FieldElement] = {}
    for i, j, acc, is_weight in raw_edges:
        x = tower.zero()
        for cls, q in acc.items():
            if not q:
                continue
            x = x + (tower.rational(q) if cls == 1 else tower.sqrt(cls) * q)
        if is_weight:
            s = fields.sign_at(x - tower.one(), tower.identity_embedding)
            if s == 0:
                raise DiagramError(f"edge ({i},{j}): weight 1 is a parallel pair, use inf")
            if s < 0:
                raise DiagramError(f"edge ({i},{j}): weight must exceed 1")
            x = -x
        if not x:
            continue
        entries[(i, j)] = x

    diagram = CoxeterDiagram(name, dim, size, tower, entries)
    # connectivity
    seen_v = {1}
    stack = [1]
    while stack:
        for w in diagram.neighbors(stack.pop()):
            if w not in seen_v:
                seen_v.add(w)
                stack.append(w)
    if len(seen_v) != size:
        raise DiagramError("diagram is not connected")
    return diagram


def load_diagram(path) -> CoxeterDiagram:
    import os

    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_diagram(text, name)


def simple_cycles(diagram: CoxeterDiagram) -> list[tuple[int, ...]]:
    """Simple cycles (length >= 3), each listed once, smallest vertex first."""
    adj: dict[int, list[int]] = {v: [] for v in range(1, diagram.size + 1)}
    for (i, j) in diagram.entries:
        adj[i].append(j)
        adj[j].append(i)
    for v in adj:
        adj[v].sort()
    cycles = []

    def dfs(start: int, path: list[int]):
        v = path[-1]
        for w in adj[v]:
            if w == start and len(path) >= 3:
                if path[1] < path[-1]:  # one orientation per cycle
                    cycles.append(tuple(path))
            elif w > start and w not in path:
                dfs(start, path + [w])

    for s in range(1, diagram.size + 1):
        dfs(s, [s])
    return cycles


def _cycle_product(diagram: CoxeterDiagram, cycle: tuple[int, ...]) -> FieldElement:
    out = diagram.tower.one()
    for t in range(len(cycle)):
        i, j = cycle[t], cycle[(t + 1) % len(cycle)]
        out = out * diagram.entries[(min(i, j), max(i, j))]
    return out


def trace_field_of(diagram: CoxeterDiagram) -> FieldTower:
    """Field generated by squared Gram entries and simple cycle products."""
    gens = [a * a for a in diagram.entries.values()]
    gens.extend(_cycle_product(diagram, c) for c in simple_cycles(diagram))
    gens = [g for g in gens if g]
    return fields.minimal_field_of(gens) if gens else make_field([])


def ambient_form(diagram: CoxeterDiagram) -> QuadraticForm:
    """The form of signature (n,1) spanned by the facet normals, over the trace field.

    Normals are rescaled by path products from the base vertex (vertex 1),
    which drags every entry into the trace field; a full-rank subset of
    n+1 rows is then selected greedily and its Gram diagonalized.
    """
    n, r = diagram.dim, diagram.size
    G = diagram.gram_rows()
    pos, neg, _zero = forms.signature_of_gram(G, diagram.tower)
    if (pos, neg) != (n, 1):
        raise SignatureError(f"not a hyperbolic polytope of dimension {n}")
    K = trace_field_of(diagram)
    # path products from the base vertex
    c: dict[int, FieldElement] = {1: diagram.tower.one()}
    order = [1]
    while order:
        v = order.pop(0)
        for w in diagram.neighbors(v):
            if w not in c:
                key = (min(v, w), max(v, w))
                c[w] = c[v] * diagram.entries[key]
                order.append(w)
    # greedy row-rank selection of n+1 independent normals
    basis: list[list[FieldElement]] = []
    pivots: list[int] = []
    selected: list[int] = []
    for v in range(1, r + 1):
        row = [G[v - 1][t] for t in range(r)]
        for brow, piv in zip(basis, pivots):
            if row[piv]:
                fac = row[piv] / brow[piv]
                row = [x - fac * y for x, y in zip(row, brow)]
        piv = next((t for t, x in enumerate(row) if x), None)
        if piv is not None:
            basis.append(row)
            pivots.append(piv)
            selected.append(v)
            if len(selected) == n + 1:
                break
    assert len(selected) == n + 1, "Gram rank below n+1 despite signature (n,1)"
    A = [[(c[s] * c[t] * G[s - 1][t - 1]).express_in(K) for t in selected]
         for s in selected]
    form, _ = forms.diagonalize(A, K)
    form.label = diagram.name
    return form
