"""Hilbert reciprocity over Q(sqrt(2)), one place at a time.

For a, b in K* the symbol (a,b)_v is -1 at an even number of places, so
the product over real embeddings, the dyadic place, and the odd places
dividing the entries is always +1.
"""

from coxarith.fields import make_field
from coxarith.localfields import (
    hilbert_symbol_local,
    real_places,
    relevant_finite_places,
)

K = make_field([2])
r2 = K.sqrt(2)

pairs = [
    (r2 + 1, K.rational(-6) * r2),  # fundamental unit against -6 sqrt(2)
    (r2, K.rational(-1)),
    (K.rational(3), r2 - 3),
]

for a, b in pairs:
    symbols = []
    for pl in real_places(K):
        symbols.append(("oo", hilbert_symbol_local(a, b, pl)))
    for pl in relevant_finite_places(K, [a, b]):
        symbols.append((pl.p, hilbert_symbol_local(a, b, pl)))
    product = 1
    for _, s in symbols:
        product *= s
    line = "  ".join(f"({v})={s:+d}" for v, s in symbols)
    print(f"({a}, {b}):  {line}  ->  product {product:+d}")
    assert product == 1
