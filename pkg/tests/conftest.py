"""Shared independent oracles: naive polynomial arithmetic over F_p[t]."""

from itertools import product

import pytest

from charp.ff import get_field


def naive_mulmod(a, b, mod, p):
    """Schoolbook product of coefficient lists (low degree first), reduced mod a monic ``mod``."""
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    m = len(mod) - 1
    for k in range(len(prod) - 1, m - 1, -1):
        c = prod[k]
        if c:
            for i in range(m + 1):
                prod[k - m + i] = (prod[k - m + i] - c * mod[i]) % p
    return (prod + [0] * m)[:m]


def naive_irreducible(f, p):
    """No monic factor of degree 1..deg/2, by trial division over all candidates."""
    m = len(f) - 1
    for d in range(1, m // 2 + 1):
        for low in product(range(p), repeat=d):
            g = list(low) + [1]
            rem = list(f)
            for k in range(m, d - 1, -1):
                c = rem[k]
                if c:
                    for i in range(d + 1):
                        rem[k - d + i] = (rem[k - d + i] - c * g[i]) % p
            if not any(rem[:d]):
                return False
    return True


def digits(code, p, m):
    return [(code // p**i) % p for i in range(m)]


def undigits(ds, p):
    return sum(d * p**i for i, d in enumerate(ds))


FIELDS = [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2)]


@pytest.fixture(params=FIELDS, ids=lambda pm: f"F{pm[0]}^{pm[1]}")
def field(request):
    return get_field(*request.param)
