"""Seeded random devices and polynomials for test suites and demos."""

from __future__ import annotations

import random

from .ff import FieldSpec
from .ir import Abp, AbpEdge, Circuit, CircuitBuilder, Const, Formula, gate_degrees
from .poly import SparsePoly


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _nonzero(F: FieldSpec, rng: random.Random) -> int:
    return rng.randrange(1, F.q)


def random_circuit(
    F: FieldSpec,
    nvars: int,
    size: int,
    seed=0,
    max_degree: int = 4,
    const_prob: float = 0.15,
) -> Circuit:
    """A single-output circuit with at most ``size`` gates and syntactic degree <= max_degree.

    Leaves come first (at least one input), then Add/Mul gates over random earlier gates.
    Multiplications that would exceed the degree budget become additions.
    """
    rng = _rng(seed)
    size = max(size, 1)
    nleaves = max(1, min(size, rng.randint(1, max(1, size // 2))))
    b = CircuitBuilder(F, nvars, share=False)
    for k in range(nleaves):
        if nvars and (k == 0 or rng.random() >= const_prob):
            b.input(rng.randrange(nvars))
        else:
            b.const(rng.randrange(F.q))
    deg = [0 if isinstance(g, Const) else 1 for g in b.gates]
    while len(b) < size:
        l, r = rng.randrange(len(b)), rng.randrange(len(b))
        lc, rc = _nonzero(F, rng), _nonzero(F, rng)
        if rng.random() < 0.5 and deg[l] + deg[r] <= max_degree:
            b.mul(l, r, lc, rc)
            deg.append(deg[l] + deg[r])
        else:
            b.add(l, r, lc, rc)
            deg.append(max(deg[l], deg[r]))
    c = b.build([len(b) - 1])
    assert max(gate_degrees(c)) <= max(max_degree, 1)
    return c


def random_formula(
    F: FieldSpec, nvars: int, size: int, seed=0, max_depth: int = 2, const_prob: float = 0.15
) -> Formula:
    """A random tree with at most ``size`` nodes and product depth <= max_depth."""
    rng = _rng(seed)
    size = max(size, 1)
    if size % 2 == 0:
        size -= 1
    b = CircuitBuilder(F, nvars, share=False)

    def leaf():
        if nvars and rng.random() >= const_prob:
            return b.input(rng.randrange(nvars))
        return b.const(rng.randrange(F.q))

    def grow(budget: int, muls_left: int) -> int:
        if budget < 3:
            return leaf()
        inner = budget - 1
        left = rng.randrange(1, inner, 2) if inner > 1 else 1
        use_mul = muls_left > 0 and rng.random() < 0.5
        depth = muls_left - 1 if use_mul else muls_left
        l = grow(left, depth)
        r = grow(inner - left, depth)
        lc, rc = _nonzero(F, rng), _nonzero(F, rng)
        return b.mul(l, r, lc, rc) if use_mul else b.add(l, r, lc, rc)

    root = grow(rng.randrange(1, size + 1, 2), max_depth)
    return b.build([root], kind="formula")


def random_abp(F: FieldSpec, nvars: int, nvertices: int, seed=0, edge_prob: float = 0.45) -> Abp:
    """A random branching program on vertices 0..V-1 with source 0 and sink V-1, pruned."""
    rng = _rng(seed)
    V = max(nvertices, 2)
    edges = []
    for u in range(V):
        for v in range(u + 1, V):
            if rng.random() < edge_prob or v == u + 1:
                var = rng.randrange(nvars) if nvars and rng.random() < 0.6 else None
                edges.append(AbpEdge(u, v, _nonzero(F, rng), var))
    return Abp(F, nvars, V, edges, 0, [V - 1]).pruned()


def random_poly(
    F, nvars: int, nterms: int, max_ideg: int, seed=0, max_total: int | None = None
) -> SparsePoly:
    rng = _rng(seed)
    terms = {}
    for _ in range(nterms):
        e = tuple(rng.randint(0, max_ideg) for _ in range(nvars))
        if max_total is not None and sum(e) > max_total:
            continue
        terms[e] = rng.randrange(1, F.q)
    return SparsePoly(F, nvars, terms)
