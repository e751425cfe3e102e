"""Straight-line programs for 2^n and n!, and the binomial window polynomial."""

from math import factorial

from charp.intslp import binomial_window_poly, pow2_factorial_slp, shamir_factorial_slp, slp_eval, slp_pow2

for n in (10, 100, 1000):
    s = slp_pow2(n)
    print(f"2^{n}: {len(s)} steps")

for n in (10, 20, 30):
    s = shamir_factorial_slp(n)
    assert slp_eval(s) == factorial(n)
    print(f"{n}!: {len(s)} steps, halving levels {[r['n'] for r in s.report]}")

s = pow2_factorial_slp(5)
print(f"32!: {len(s)} steps, value {slp_eval(s)}")

for n in (2, 3, 4):
    r = binomial_window_poly(n)
    print(f"window n={n}: identity {'holds' if r.identity_holds else 'fails, missing ' + str(r.missing_terms)}, "
          f"f(0,1) = {r.f01} vs C(2n,n)+2 = {r.expected_f01}")
