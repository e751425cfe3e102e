"""x^p - x vanishes at every point of F_p yet is not the zero polynomial."""

from charp.ff import get_field
from charp.ir import CircuitBuilder, evaluate_codes
from charp.pit import pit_bruteforce, pit_random

for p in (2, 3, 5):
    F = get_field(p)
    b = CircuitBuilder(F, 1)
    x = b.input(0)
    phi = b.build([b.add(b.power(x, p), x, 1, F.neg(1))])
    values = [evaluate_codes(phi, [a])[0] for a in range(p)]
    v = pit_bruteforce(phi)
    print(f"p={p}: values on F_{p} = {values}; verdict is_zero={v.is_zero}, "
          f"witness {list(v.witness)} in {v.field.name()}")

# the randomized test samples from a set of size 2D+1, which forces an extension too
F = get_field(2)
b = CircuitBuilder(F, 1)
x = b.input(0)
phi = b.build([b.add(b.power(x, 2), x, 1, 1)])
v = pit_random(phi, trials=10, rng_seed=1)
print(f"random test over F_2: is_zero={v.is_zero}, field {v.field.name()}")
