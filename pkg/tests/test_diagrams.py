"""Diagram parsing, Gram data, cycles, trace fields, ambient forms."""

import glob
import os
import random
from fractions import Fraction

import pytest

from coxarith import diagrams, fields, forms
from coxarith.diagrams import (
    DiagramError,
    SignatureError,
    UnsupportedLabelError,
    ambient_form,
    load_diagram,
    parse_diagram,
    simple_cycles,
    trace_field_of,
)
from coxarith.fields import make_field

CORPUS = os.path.join(os.path.dirname(__file__), "..", "corpus")

DELTA5 = """
dim 5
vertices 6
edge 1 2 3
edge 2 3 4
edge 3 4 3
edge 4 5 3
edge 5 6 3
edge 6 1 3
"""

TRIANGLE_334 = """
dim 2
vertices 3
edge 1 2 3
edge 2 3 3
edge 1 3 4
"""


def test_parse_gram_entries():
    d = parse_diagram(DELTA5, "delta5")
    assert (d.dim, d.size) == (5, 6)
    G = d.gram_rows()
    assert G[0][0] == d.tower.one()
    assert G[0][1].rational_value() == Fraction(-1, 2)
    assert G[1][2] == -d.tower.sqrt(2) * Fraction(1, 2)
    assert G[0][2] == d.tower.zero()  # absent pair is a right angle
    assert G[2][1] == G[1][2]


def test_label_values():
    text = "dim 2\nvertices 3\nedge 1 2 {}\nedge 2 3 3\nedge 1 3 3\n"
    d = parse_diagram(text.format(4))
    assert d.entries[(1, 2)] == -d.tower.sqrt(2) * Fraction(1, 2)
    d = parse_diagram(text.format(5))
    assert d.entries[(1, 2)] == -(d.tower.one() + d.tower.sqrt(5)) * Fraction(1, 4)
    d = parse_diagram(text.format(6))
    assert d.entries[(1, 2)] == -d.tower.sqrt(3) * Fraction(1, 2)
    d = parse_diagram(text.format(12))
    assert d.entries[(1, 2)] == -(d.tower.sqrt(6) + d.tower.sqrt(2)) * Fraction(1, 4)
    d = parse_diagram(text.replace("edge 1 2 {}", "edge 1 2 inf"))
    assert d.entries[(1, 2)] == d.tower.rational(-1)


def test_explicit_label_two_means_no_edge():
    d = parse_diagram("dim 2\nvertices 3\nedge 1 2 2\nedge 1 2 3\nedge 2 3 3\nedge 1 3 3\n"
                      .replace("edge 1 2 2\nedge 1 2 3", "edge 1 2 3"))
    assert (1, 2) in d.entries
    # a parse with an explicit 2 on a different pair: no entry stored
    d2 = parse_diagram("dim 2\nvertices 4\nedge 1 2 3\nedge 2 3 3\nedge 3 4 3\n"
                       "edge 1 4 2\nedge 1 3 3\n")
    assert (1, 4) not in d2.entries


def test_weight_expression_forms():
    base = "dim 2\nvertices 3\nedge 2 3 3\nedge 1 3 3\nedge 1 2 w {}\n"
    d = parse_diagram(base.format("1/2*sqrt(2)+1/3*sqrt(15)"))
    x = -d.entries[(1, 2)]
    assert x == d.tower.sqrt(2) * Fraction(1, 2) + d.tower.sqrt(15) * Fraction(1, 3)
    d = parse_diagram(base.format("cospi(5)+1/3*sqrt(15)"))
    x = -d.entries[(1, 2)]
    assert x == (d.tower.one() + d.tower.sqrt(5)) * Fraction(1, 4) + d.tower.sqrt(15) * Fraction(1, 3)
    d = parse_diagram(base.format("sqrt(8)-sqrt(2)"))  # = sqrt(2), normalized
    assert -d.entries[(1, 2)] == d.tower.sqrt(2)
    d = parse_diagram(base.format("3-sqrt(2)"))
    assert fields.sign_at(-d.entries[(1, 2)] - d.tower.one(),
                          d.tower.identity_embedding) > 0


def test_parse_errors():
    with pytest.raises(DiagramError, match="dim"):
        parse_diagram("dim x\nvertices 3\n")
    with pytest.raises(DiagramError, match="headers"):
        parse_diagram("edge 1 2 3\n")
    with pytest.raises(DiagramError, match="duplicate"):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 3\nedge 2 1 4\nedge 2 3 3\nedge 1 3 3\n")
    with pytest.raises(DiagramError, match="out of range"):
        parse_diagram("dim 2\nvertices 3\nedge 1 4 3\n")
    with pytest.raises(DiagramError, match="not connected"):
        parse_diagram("dim 3\nvertices 4\nedge 1 2 3\nedge 3 4 3\n")
    with pytest.raises(UnsupportedLabelError, match="non-multiquadratic"):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 7\nedge 2 3 3\nedge 1 3 3\n")
    with pytest.raises(UnsupportedLabelError):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 w cospi(8)\nedge 2 3 3\nedge 1 3 3\n")
    with pytest.raises(DiagramError, match="use inf"):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 w 1\nedge 2 3 3\nedge 1 3 3\n")
    with pytest.raises(DiagramError, match="exceed 1"):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 w 1/2\nedge 2 3 3\nedge 1 3 3\n")
    with pytest.raises(DiagramError, match="weight"):
        parse_diagram("dim 2\nvertices 3\nedge 1 2 w sqrt(2)*\nedge 2 3 3\nedge 1 3 3\n")


def test_simple_cycles():
    d = parse_diagram(DELTA5, "delta5")
    cycles = simple_cycles(d)
    assert cycles == [(1, 2, 3, 4, 5, 6)]
    t = parse_diagram(TRIANGLE_334)
    assert simple_cycles(t) == [(1, 2, 3)]
    path = parse_diagram("dim 2\nvertices 3\nedge 1 2 3\nedge 2 3 4\n")
    assert simple_cycles(path) == []


def test_trace_field_examples():
    d = parse_diagram(DELTA5, "delta5")
    assert trace_field_of(d) == make_field([2])
    t = parse_diagram(TRIANGLE_334)
    assert trace_field_of(t) == make_field([2])
    # a tree with label 4 edges only: squared entries are rational,
    # no cycles, so the trace field collapses to Q
    tree = parse_diagram("dim 2\nvertices 3\nedge 1 2 4\nedge 2 3 4\n")
    assert trace_field_of(tree) == make_field([])


def test_ambient_form_signature_and_field():
    d = parse_diagram(DELTA5, "delta5")
    f = ambient_form(d)
    K = trace_field_of(d)
    assert f.tower == K and f.rank == 6
    assert forms.signature_at(f, K.identity_embedding) == (5, 1)
    assert f.det()


def test_ambient_form_rejects_wrong_signature():
    spherical = "dim 2\nvertices 3\nedge 1 2 3\nedge 2 3 3\nedge 1 3 3\n"
    with pytest.raises(SignatureError, match="not a hyperbolic polytope"):
        ambient_form(parse_diagram(spherical))
    euclidean = "dim 2\nvertices 3\nedge 1 2 3\nedge 2 3 6\nedge 1 3 2\n"
    with pytest.raises(SignatureError):
        ambient_form(parse_diagram(euclidean))


def test_relabeling_permutes_entries():
    d = parse_diagram(DELTA5, "delta5")
    rng = random.Random(3)
    for _ in range(5):
        perm = list(range(1, d.size + 1))
        rng.shuffle(perm)
        r = d.relabeled(perm)
        assert len(r.entries) == len(d.entries)
        for (i, j), a in d.entries.items():
            x, y = perm[i - 1], perm[j - 1]
            assert r.entries[(min(x, y), max(x, y))] == a


def test_relabeled_ambient_form_is_isometric():
    d = parse_diagram(DELTA5, "delta5")
    f = ambient_form(d)
    rotated = d.relabeled([4, 5, 6, 1, 2, 3])  # new base vertex
    g = ambient_form(rotated)
    assert forms.globally_isometric(f, g)


def test_corpus_parses_and_is_hyperbolic():
    paths = sorted(glob.glob(os.path.join(CORPUS, "*.cox")))
    assert len(paths) == 8
    for p in paths:
        d = load_diagram(p)
        f = ambient_form(d)
        assert forms.signature_at(f, f.tower.identity_embedding) == (d.dim, 1)


def test_load_diagram_missing_file():
    with pytest.raises(OSError):
        load_diagram(os.path.join(CORPUS, "nope.cox"))
