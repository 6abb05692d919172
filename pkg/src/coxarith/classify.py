"""Arithmeticity ladder for hyperbolic Coxeter diagrams.

A reflection group with ambient form f over its trace field K is

  * quasi-arithmetic  iff f is admissible (signature (n,1) at the identity
    embedding, definite at every other one);
  * arithmetic        iff additionally the doubled Gram data is integral:
    every (2a_ij)^2 and every product of doubled entries around a simple
    cycle is an algebraic integer;
  * pseudo-arithmetic of the first type over K/k, for a non-quasi-arithmetic
    group, iff f becomes isometric over K to an admissible form g defined
    over a proper subfield k.

The subfield is located by scaled trace transfers: f descends in the Witt
ring to k exactly when its transfer to every index-2 subfield containing k
is hyperbolic, so k is the meet of the index-2 subfields with hyperbolic
transfer.  The admissible model over Q is searched in the one-parameter
family <-1, 1, ..., 1, a>; the determinant pins a up to rational squares,
so only squarefree candidates are tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import diagrams, fields, forms, localfields
from .diagrams import CoxeterDiagram
from .fields import FieldElement, FieldTower, element_literal, factorize, make_field, squarefree_part
from .forms import QuadraticForm

__all__ = [
    "ARITHMETIC",
    "QUASI_ARITHMETIC",
    "PSEUDO_ARITHMETIC",
    "UNDETERMINED",
    "ClassificationReport",
    "classify_diagram",
    "descend_field",
    "find_admissible_model",
    "subordinated_forms",
    "report_from_json",
    "basis_det_check",
]

ARITHMETIC = "arithmetic"
QUASI_ARITHMETIC = "quasi-arithmetic-nonarithmetic"
PSEUDO_ARITHMETIC = "pseudo-arithmetic-first-type"
UNDETERMINED = "undetermined"


def _integrality_witness(diagram: CoxeterDiagram) -> dict | None:
    """Doubled Gram data that fails to be an algebraic integer, if any."""
    for (i, j), a in sorted(diagram.entries.items()):
        x = a * a * 4
        if not fields.is_algebraic_integer(x):
            return {"kind": "entry", "edge": [i, j], "value": element_literal(x)}
    for cyc in diagrams.simple_cycles(diagram):
        x = diagrams._cycle_product(diagram, cyc) * (2 ** len(cyc))
        if not fields.is_algebraic_integer(x):
            return {"kind": "cycle", "cycle": list(cyc), "value": element_literal(x)}
    return None


def descend_field(f: QuadraticForm) -> tuple[FieldTower, list[tuple[FieldTower, bool]], str | None]:
    """Smallest subfield receiving f in the Witt ring, with the transfer table.

    Returns (k, [(subfield, transfer hyperbolic?)], note).  k equals the
    trace field itself when no descent exists; a non-None note flags an
    inconsistent transfer pattern (descent claim withdrawn).
    """
    K = f.tower
    if K.r == 0:
        return K, [], None
    table = []
    for F in fields.subfields_index2(K):
        table.append((F, localfields.is_hyperbolic(forms.transfer(f, F))))
    hyper = [F for F, h in table if h]
    if not hyper:
        return K, table, None
    k = hyper[0]
    for F in hyper[1:]:
        k = fields.intersect(k, F)
    for F, h in table:
        if not h and k.subgroup_classes <= F.subgroup_classes:
            return K, table, "transfer pattern is not an interval: no descent field"
    return k, table, None


def find_admissible_model(f: QuadraticForm, k: FieldTower,
                          bound: int = 30) -> tuple[QuadraticForm | None, int | None]:
    """Admissible form over k isometric to f over the trace field.

    Searches <-1, 1, ..., 1, a> for squarefree a >= 1: candidates from the
    prime support of det(f) and of the tower radicands, then 1..bound.
    Only the rational base field is searched; over a larger k this shape is
    never definite at the conjugate embeddings.
    """
    if k.r != 0:
        return None, None
    K = f.tower
    detf = f.det()
    n = abs(fields.integral_rescale(detf).rational_norm().numerator)
    ps = {2} | {p for p, _ in factorize(n)}
    for d in K.radicands:
        ps |= {p for p, _ in factorize(d)}
    cands: set[int] = set()
    if len(ps) <= 12:
        plist = sorted(ps)
        for size in range(len(plist) + 1):
            for sub in combinations(plist, size):
                prod = 1
                for p in sub:
                    prod *= p
                cands.add(prod)
    cands.update(a for a in range(1, max(bound, 1) + 1) if squarefree_part(a) == a)
    base = [-1] + [1] * (f.rank - 2)
    for a in sorted(cands):
        ok, _ = fields.is_square(K.rational(-a) * detf)
        if not ok:
            continue
        gK = QuadraticForm(K, base + [a])
        if forms.globally_isometric(gK, f):
            return QuadraticForm(k, base + [a], label=f"model[a={a}]"), a
    return None, None


def subordinated_forms(model: QuadraticForm, K: FieldTower) -> list[QuadraticForm]:
    """One form per square class of K over the model's field: the last entry
    of the model multiplied through the class representatives."""
    k = model.tower
    reps = sorted({min(squarefree_part(t * s) for s in k.subgroup_classes)
                   for t in K.subgroup_classes})
    out = []
    for t in reps:
        diag = list(model.diagonal[:-1]) + [model.diagonal[-1] * t]
        out.append(QuadraticForm(k, diag, label=f"subordinated[{t}]"))
    return out


@dataclass
class ClassificationReport:
    name: str
    dim: int
    vertices: int
    trace_field: FieldTower
    ambient: QuadraticForm
    quasi: bool
    arithmetic: bool
    verdict: str
    base_field: FieldTower | None = None
    transfers: list[tuple[FieldTower, bool]] = field(default_factory=list)
    model: QuadraticForm | None = None
    model_a: int | None = None
    subordinated: list[QuadraticForm] | None = None
    witnesses: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        def tower_json(t: FieldTower) -> dict:
            return {"radicands": list(t.radicands), "degree": t.degree}

        def diag_json(g: QuadraticForm) -> list[str]:
            return [element_literal(c) for c in g.diagonal]

        return {
            "diagram": self.name,
            "dim": self.dim,
            "vertices": self.vertices,
            "trace_field": tower_json(self.trace_field),
            "ambient_diagonal": diag_json(self.ambient),
            "quasi_arithmetic": self.quasi,
            "arithmetic": self.arithmetic,
            "verdict": self.verdict,
            "base_field": tower_json(self.base_field) if self.base_field else None,
            "transfers": [{"subfield": list(F.radicands), "hyperbolic": h}
                          for F, h in self.transfers],
            "model": ({"diagonal": diag_json(self.model), "a": self.model_a}
                      if self.model is not None else None),
            "subordinated": ([diag_json(g) for g in self.subordinated]
                             if self.subordinated is not None else None),
            "witnesses": self.witnesses,
            "notes": self.notes,
        }


def report_from_json(data: dict) -> ClassificationReport:
    """Rebuild a report from its to_json dict (inverse up to form labels)."""
    K = make_field(data["trace_field"]["radicands"])
    ambient = QuadraticForm(K, [fields.parse_element(s, K)
                                for s in data["ambient_diagonal"]])
    base = (make_field(data["base_field"]["radicands"])
            if data.get("base_field") else None)
    model = None
    if data.get("model") is not None:
        model = QuadraticForm(base, [fields.parse_element(s, base)
                                     for s in data["model"]["diagonal"]])
    sub = None
    if data.get("subordinated") is not None:
        sub = [QuadraticForm(base, [fields.parse_element(s, base) for s in diag])
               for diag in data["subordinated"]]
    return ClassificationReport(
        name=data["diagram"], dim=data["dim"], vertices=data["vertices"],
        trace_field=K, ambient=ambient,
        quasi=data["quasi_arithmetic"], arithmetic=data["arithmetic"],
        verdict=data["verdict"], base_field=base,
        transfers=[(make_field(t["subfield"]), t["hyperbolic"])
                   for t in data.get("transfers", [])],
        model=model,
        model_a=(data["model"] or {}).get("a"),
        subordinated=sub,
        witnesses=data.get("witnesses", {}),
        notes=data.get("notes", []),
    )


def classify_diagram(diagram: CoxeterDiagram, bound: int = 30) -> ClassificationReport:
    K = diagrams.trace_field_of(diagram)
    f = diagrams.ambient_form(diagram)
    report = ClassificationReport(
        name=diagram.name, dim=diagram.dim, vertices=diagram.size,
        trace_field=K, ambient=f, quasi=False, arithmetic=False,
        verdict=UNDETERMINED,
    )
    if forms.is_admissible(f):
        report.quasi = True
        witness = _integrality_witness(diagram)
        if witness is None:
            report.arithmetic = True
            report.verdict = ARITHMETIC
        else:
            report.verdict = QUASI_ARITHMETIC
            report.witnesses["nonintegral"] = witness
        report.base_field = K
        report.model = f
        report.subordinated = [f]
        return report

    # not quasi-arithmetic: record where admissibility failed, then descend
    for idx, sigma in enumerate(K.embeddings()):
        pos, neg = forms.signature_at(f, sigma)
        if (idx == 0 and neg != 1) or (idx > 0 and pos and neg):
            report.witnesses["inadmissible_at"] = {"embedding": idx,
                                                   "signature": [pos, neg]}
            break
    k, table, note = descend_field(f)
    report.transfers = table
    if note:
        report.notes.append(note)
    if k == K:
        report.notes.append("no proper subfield receives the form in the Witt ring")
        return report
    report.base_field = k
    model, a = find_admissible_model(f, k, bound)
    if model is None:
        if k.r != 0:
            report.notes.append(
                "descends to a proper irrational subfield; model search covers "
                "the rational base field only")
        else:
            report.notes.append(
                f"no admissible rational model <-1,1,...,1,a> with a up to {bound}")
        return report
    report.model = model
    report.model_a = a
    report.subordinated = subordinated_forms(model, K)
    report.verdict = PSEUDO_ARITHMETIC
    return report


# -- determinant identity for the multiquadratic basis --------------------


def _int_det(rows: list[list[int]]) -> int:
    """Exact integer determinant (fraction-free Bareiss)."""
    a = [row[:] for row in rows]
    n = len(a)
    sign = 1
    prev = 1
    for i in range(n - 1):
        if not a[i][i]:
            for j in range(i + 1, n):
                if a[j][i]:
                    a[i], a[j] = a[j], a[i]
                    sign = -sign
                    break
            else:
                return 0
        for j in range(i + 1, n):
            for t in range(i + 1, n):
                a[j][t] = (a[j][t] * a[i][i] - a[j][i] * a[i][t]) // prev
            a[j][i] = 0
        prev = a[i][i]
    return sign * a[-1][-1]


def _det_field(rows: list[list[FieldElement]], tower: FieldTower) -> FieldElement:
    a = [row[:] for row in rows]
    n = len(a)
    det = tower.one()
    for i in range(n):
        piv = next((j for j in range(i, n) if a[j][i]), None)
        if piv is None:
            return tower.zero()
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det = det * a[i][i]
        inv = tower.one() / a[i][i]
        for j in range(i + 1, n):
            if a[j][i]:
                fac = a[j][i] * inv
                a[j] = [x - fac * y for x, y in zip(a[j], a[i])]
    return det


def basis_det_check(tower: FieldTower) -> dict:
    """Exact check of det(sigma_j(alpha_i)) = det(B) * prod(alpha_i).

    B is the sign matrix sigma_j(alpha_i)/alpha_i over the multiquadratic
    basis alpha_S; its determinant is computed as an integer, the left side
    independently by Gaussian elimination in the field.
    """
    deg = tower.degree
    alphas = []
    for S in range(deg):
        cs = [Fraction(0)] * deg
        cs[S] = Fraction(1)
        alphas.append(tower.element(cs))
    embs = tower.embeddings()
    B = [[-1 if (S & sigma.mask).bit_count() & 1 else 1 for S in range(deg)]
         for sigma in embs]
    det_b = _int_det(B)
    M = [[alphas[S].conjugate(sigma) for S in range(deg)] for sigma in embs]
    det_m = _det_field(M, tower)
    prod = tower.one()
    for x in alphas:
        prod = prod * x
    return {
        "radicands": list(tower.radicands),
        "r": tower.r,
        "det_B": det_b,
        # both readings of the determinant: the embedding matrix itself and
        # its square (the discriminant of the trace form on this basis)
        "det": element_literal(det_m),
        "det_squared": str((det_m * det_m).rational_value()),
        "identity_holds": det_m == tower.rational(det_b) * prod,
    }
