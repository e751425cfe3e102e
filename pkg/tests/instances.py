"""Engineered circuits on which a bootstrap generator provably fails.

Both use deliberately easy monomial families, so that two algebraic
relations among generator components can be written down by hand.
"""

from itertools import permutations

from charp.ff import get_field
from charp.gen import bootstrap_generator, monomial_oracle
from charp.ir import CircuitBuilder

F2 = get_field(2)


def shared_support_instance(s: int):
    """g = x1^3: components whose design sets share their smallest element coincide,
    so f = y_i - y_j vanishes on the generator.  Returns (f, G, expected index, (i, j))."""
    G = bootstrap_generator(monomial_oracle(F2, 2, (3, 0)), s)
    first = {}
    for j, sup in enumerate(G.supports):
        if sup[0] in first:
            i = first[sup[0]]
            break
        first[sup[0]] = j
    else:
        raise AssertionError("no two design sets share their smallest element")
    b = CircuitBuilder(F2, G.nvars_out)
    f = b.build([b.add(b.input(i), b.input(j), 1, F2.neg(1))])
    return f, G, j + 1, (i, j)


def four_cycle_instance(s: int):
    """g = x1 x2: sets {a,b}, {c,e}, {a,c}, {b,e} give G_i G_j = G_k G_l,
    so f = y_i y_j - y_k y_l vanishes on the generator."""
    G = bootstrap_generator(monomial_oracle(F2, 2), s)
    edges = {tuple(sup): idx for idx, sup in enumerate(G.supports)}
    found = None
    for (a, b), i in sorted(edges.items()):
        for (c, e), j in sorted(edges.items()):
            if len({a, b, c, e}) < 4:
                continue
            for x, y in permutations((c, e)):
                k = edges.get(tuple(sorted((a, x))))
                l = edges.get(tuple(sorted((b, y))))
                if k is not None and l is not None:
                    found = (i, j, k, l)
                    break
            if found:
                break
        if found:
            break
    if found is None:
        raise AssertionError("design has no four-cycle")
    i, j, k, l = found
    bld = CircuitBuilder(F2, G.nvars_out)
    left = bld.mul(bld.input(i), bld.input(j))
    right = bld.mul(bld.input(k), bld.input(l))
    f = bld.build([bld.add(left, right, 1, F2.neg(1))])
    return f, G, max(found) + 1, found
