import random
from itertools import product
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from charp.errors import DomainError, ParseError, ResourceError, UsageError
from charp.ff import get_field
from charp.ir import CircuitBuilder, build_power
from charp.poly import (
    ZZ,
    SparsePoly,
    circuit_from_poly,
    expand,
    expand_all,
    kronecker_decode,
    kronecker_encode,
    poly_mod_p_decompose,
    pth_root_poly,
)
from charp.sampling import random_circuit, random_poly

F2, F3, F4, F5, F9 = get_field(2), get_field(3), get_field(2, 2), get_field(5), get_field(3, 2)


def P(F, n, terms):
    return SparsePoly(F, n, terms)


def naive_mul(f, g):
    """Independent schoolbook product on raw dicts."""
    F = f.field
    out = {}
    for e1, c1 in f.terms.items():
        for e2, c2 in g.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = F.add(out.get(e, 0), F.mul(c1, c2))
    return {e: c for e, c in out.items() if c}


# -- oracles ------------------------------------------------------------------------------


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_product_matches_schoolbook(seed):
    F = [F3, F4, F9][seed % 3]
    f = random_poly(F, 2, 6, 4, seed)
    g = random_poly(F, 2, 6, 4, seed + 1)
    assert (f * g).terms == naive_mul(f, g)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_ring_laws(seed):
    F = [F2, F5, F4][seed % 3]
    f, g, h = (random_poly(F, 3, 5, 3, seed + i) for i in range(3))
    assert f * (g + h) == f * g + f * h
    assert (f + g) - g == f
    assert not (f + (-f))
    pt = [random.Random(seed).randrange(F.q) for _ in range(3)]
    assert (f * g).eval_codes(pt) == F.mul(f.eval_codes(pt), g.eval_codes(pt))


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_mod_p_decomposition_recombines(seed):
    F = [F2, F3, F4, F9][seed % 4]
    f = random_poly(F, 2, 8, 7, seed)
    dec = poly_mod_p_decompose(f)
    assert dec.recombine() == f
    # coefficient of x^e in f is the pth power of the coefficient of x^(e div p) in f_(e mod p)
    p = F.p
    for e, c in f.terms.items():
        a = tuple(x % p for x in e)
        q = tuple(x // p for x in e)
        assert F.frob(dec.component(a).coefficient(q)) == c


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_pth_root_inverts_power(seed):
    F = [F2, F3, F4, F5][seed % 4]
    g = random_poly(F, 2, 5, 3, seed)
    assert pth_root_poly(g**F.p) == g


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_kronecker_round_trip(seed):
    b = [2, 3, 5][seed % 3]
    g = random_poly(F3, 2, 6, 31, seed)
    f = kronecker_encode(g, b)
    K = f.nvars // 2
    assert f.ideg() <= b - 1
    assert kronecker_decode(f, b, K, 2) == g


# -- known values -------------------------------------------------------------------------


def test_difference_of_squares_over_f5():
    x0, x1 = SparsePoly.var(F5, 2, 0), SparsePoly.var(F5, 2, 1)
    assert (x0 + x1) * (x0 - x1) == P(F5, 2, {(2, 0): 1, (0, 2): 4})


def test_freshmans_dream():
    for F in (F2, F3, F5):
        x = SparsePoly.var(F, 1, 0)
        assert (x + 1) ** F.p == P(F, 1, {(F.p,): 1, (0,): 1})


def test_decomposition_example_over_f2():
    # f = x1^3 + x1 x2 + x2 ; [DERIVED] by grouping exponents by parity
    f = P(F2, 2, {(3, 0): 1, (1, 1): 1, (0, 1): 1})
    dec = poly_mod_p_decompose(f)
    assert not dec.component((0, 0))
    assert dec.component((1, 0)) == SparsePoly.var(F2, 2, 0)
    assert dec.component((1, 1)) == SparsePoly.constant(F2, 2, 1)
    assert dec.component((0, 1)) == SparsePoly.constant(F2, 2, 1)


def test_decomposition_of_constant_takes_root():
    w = 2  # t in F_4
    dec = poly_mod_p_decompose(SparsePoly.constant(F4, 1, w))
    assert dec.component((0,)) == SparsePoly.constant(F4, 1, F4.root(w))


def test_pth_root_examples():
    assert pth_root_poly(P(F2, 1, {(2,): 1, (0,): 1})) == P(F2, 1, {(1,): 1, (0,): 1})
    assert pth_root_poly(P(F3, 2, {(3, 0): 1, (0, 3): 2})) == P(F3, 2, {(1, 0): 1, (0, 1): 2})
    with pytest.raises(DomainError, match=r"\[1\]"):
        pth_root_poly(P(F2, 1, {(1,): 1, (0,): 1}))


def test_kronecker_examples():
    g = P(F2, 1, {(3,): 1, (2,): 1, (0,): 1})
    f = kronecker_encode(g, 2)
    assert f == P(F2, 2, {(1, 1): 1, (0, 1): 1, (0, 0): 1})
    assert kronecker_decode(f, 2, 2, 1) == g
    assert kronecker_encode(P(F3, 1, {(8,): 1}), 3) == P(F3, 2, {(2, 2): 1})
    ml = P(F2, 2, {(1, 1): 1, (1, 0): 1})
    assert kronecker_encode(ml, 2, 1) == ml
    assert not kronecker_decode(SparsePoly.zero(F2, 2), 2, 2, 1)
    with pytest.raises(UsageError):
        kronecker_encode(g, 2, 1)
    with pytest.raises(DomainError):
        kronecker_decode(P(F3, 2, {(2, 0): 1}), 2, 2, 1)


def test_sorted_terms_graded_lex():
    f = P(F3, 2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (2, 0): 1, (1, 1): 1})
    assert [e for e, _ in f.sorted_terms()] == [(2, 0), (1, 1), (1, 0), (0, 1), (0, 0)]


def test_int_codes_are_field_codes():
    assert SparsePoly.constant(F4, 1, 3).coefficient((0,)) == 3
    assert SparsePoly.constant(F5, 1, 7).coefficient((0,)) == 2
    with pytest.raises(UsageError):
        SparsePoly.constant(F4, 1, 4)


def test_integer_ring():
    x = SparsePoly.var(ZZ, 1, 0)
    f = (x + 1) ** 5
    assert [f.coefficient((k,)) for k in range(6)] == [comb(5, k) for k in range(6)]
    assert f.eval([2]) == 243


def test_text_round_trip():
    f = random_poly(F9, 3, 10, 4, 7)
    assert SparsePoly.from_text(f.to_text()) == f
    z = SparsePoly.var(ZZ, 2, 0) * -3 + 5
    assert SparsePoly.from_text(z.to_text()) == z
    with pytest.raises(ParseError, match="line 3"):
        SparsePoly.from_text(F3.header() + "\nnvars 1\n[1 2] : [1]\n")


# -- expansion ----------------------------------------------------------------------------


def test_expand_examples():
    b = CircuitBuilder(F2, 1)
    c = b.build([b.add(b.input(0), b.const(1))])
    assert expand(build_power(c, 2)) == P(F2, 1, {(2,): 1, (0,): 1})
    b = CircuitBuilder(F2, 1)
    assert not expand(b.build([b.const(0)])).terms


@pytest.mark.parametrize("seed", range(20))
def test_expand_against_pointwise_values(seed):
    # a polynomial of individual degree < q is determined by its values on F_q^n
    F = F9
    c = random_circuit(F, 2, 12, seed, max_degree=4)
    f = expand(c)
    from charp.ir import evaluate_codes

    for pt in product(range(F.q), repeat=2):
        assert f.eval_codes(pt) == evaluate_codes(c, pt)[0]
    assert f.ideg() < F.q


def test_expand_caps():
    b = CircuitBuilder(F2, 1)
    c = build_power(b.build([b.input(0)]), 2**10)
    with pytest.raises(ResourceError):
        expand(c, degree_cap=64)
    b = CircuitBuilder(F3, 6)
    s = b.sum([(b.input(i), 1) for i in range(6)] + [(b.const(1), 1)])
    c = build_power(b.build([s]), 6)
    with pytest.raises(ResourceError):
        expand(c, term_cap=50)


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_circuit_from_poly_round_trip(seed):
    f = random_poly(F4, 3, 6, 5, seed)
    assert expand(circuit_from_poly(f)) == f


def test_expand_all_multi_output():
    b = CircuitBuilder(F3, 2)
    x, y = b.input(0), b.input(1)
    c = b.build([b.mul(x, y), b.add(x, y)])
    got = expand_all(c)
    assert got[0] == P(F3, 2, {(1, 1): 1})
    assert got[1] == P(F3, 2, {(1, 0): 1, (0, 1): 1})
