"""Certified evaluation of 73/23040 zeta(3) + 1/360 sqrt(2) L(chi8, 3).

The interval shrinks onto the 26-digit reference constant; every bound
is an exact rational, so the agreement is a proof up to the precision of
the printed reference.
"""

from coxarith.lvalues import decimal_str, delta5_volume_check, volume_ball

for digits in (6, 12, 18, 24):
    ball = volume_ball(digits)
    lo = decimal_str(ball.value - ball.err, digits + 2)
    hi = decimal_str(ball.value + ball.err, digits + 2)
    print(f"digits={digits:2d}  value in [{lo}, {hi}]")

res = delta5_volume_check(24)
print()
print("computed :", res["value"])
print("reference:", res["reference"])
print(f"match: {res['match']}  "
      f"(certified significant digits: {res['certified_significant_digits']})")
