"""Classify every diagram in corpus/ and print its descent data.

All eight bundled diagrams are nonarithmetic but admit a rational model
<-1,1,...,1,a> with a = 1, i.e. they are pseudo-arithmetic of the first
type over Q.
"""

from pathlib import Path

from coxarith.classify import classify_diagram
from coxarith.diagrams import load_diagram
from coxarith.fields import element_literal

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def field_name(tower):
    if tower.r == 0:
        return "Q"
    return "Q(" + ", ".join(f"sqrt({d})" for d in tower.radicands) + ")"


for path in sorted(CORPUS.glob("*.cox")):
    rep = classify_diagram(load_diagram(path))
    K = rep.trace_field
    print(f"{rep.name}: dim {rep.dim}, {rep.vertices} vertices")
    print(f"  trace field {field_name(K)}, degree {K.degree}")
    print(f"  verdict: {rep.verdict}")
    for sub, hyper in rep.transfers:
        word = "hyperbolic" if hyper else "not hyperbolic"
        print(f"  transfer to {field_name(sub)}: {word}")
    if rep.model is not None:
        diag = ", ".join(element_literal(c) for c in rep.model.diagonal)
        print(f"  model over {field_name(rep.base_field)}: "
              f"<{diag}>  (a = {rep.model_a})")
    print()
