from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from charp.errors import UsageError
from charp.ff import (
    FieldElement,
    find_irreducible,
    frobenius,
    get_field,
    is_irreducible,
    prime_power,
    pth_root,
    smallest_extension,
)
from conftest import FIELDS, digits, naive_irreducible, naive_mulmod, undigits


# -- oracles first ------------------------------------------------------------------------


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)])
def test_modulus_is_lex_smallest_irreducible(p, m):
    f = find_irreducible(p, m)
    assert naive_irreducible(list(f), p)
    # every smaller candidate in the documented order is reducible
    for code in range(undigits(list(f[:-1]), p)):
        assert not naive_irreducible(digits(code, p, m) + [1], p)


@pytest.mark.parametrize("p,m", [(2, 5), (3, 3), (5, 3)])
def test_rabin_test_agrees_with_trial_division(p, m):
    for low in product(range(p), repeat=m):
        f = list(low) + [1]
        assert is_irreducible(f, p) == naive_irreducible(f, p)


def test_multiplication_matches_schoolbook(field):
    p, m = field.p, field.m
    for a in range(field.q):
        for b in range(field.q):
            want = undigits(naive_mulmod(digits(a, p, m), digits(b, p, m), list(field.modulus), p), p)
            assert field.mul(a, b) == want


def test_addition_is_digitwise(field):
    p, m = field.p, field.m
    for a in range(field.q):
        for b in range(0, field.q, 3):
            want = undigits([(x + y) % p for x, y in zip(digits(a, p, m), digits(b, p, m))], p)
            assert field.add(a, b) == want


# -- known values -------------------------------------------------------------------------


def test_known_moduli():
    # [DERIVED] by hand: t^2+t+1 for F_4, t^3+t+1 for F_8, t^2+1 for F_9
    assert get_field(2, 2).modulus == (1, 1, 1)
    assert get_field(2, 3).modulus == (1, 1, 0, 1)
    assert get_field(3, 2).modulus == (1, 0, 1)


def test_f4_table():
    F = get_field(2, 2)
    t = 2  # code of t
    assert F.mul(t, t) == 3  # t^2 = t + 1
    assert F.mul(3, 3) == t
    assert F.inv(t) == 3


def test_prime_power():
    assert prime_power(4) == (2, 2)
    assert prime_power(9) == (3, 2)
    assert prime_power(7) == (7, 1)
    assert prime_power(6) is None
    assert prime_power(1) is None


def test_canonical_elements_order():
    F = get_field(2, 2)
    g = F.primitive_element()
    assert F.canonical_elements(4) == [0, 1, g, F.mul(g, g)]
    assert sorted(F.canonical_elements(4)) == [0, 1, 2, 3]
    with pytest.raises(UsageError):
        F.canonical_elements(5)


def test_primitive_element_generates(field):
    g = field.primitive_element()
    seen = {field.pow(g, e) for e in range(field.q - 1)}
    assert len(seen) == field.q - 1


def test_smallest_extension():
    F2 = get_field(2)
    assert smallest_extension(F2, 2) == F2
    assert smallest_extension(F2, 3) == get_field(2, 2)
    assert smallest_extension(F2, 5) == get_field(2, 3)
    assert smallest_extension(get_field(2, 2), 5) == get_field(2, 4)


def test_embedding_is_a_ring_map():
    small, big = get_field(2, 2), get_field(2, 4)
    emb = small.embedding(big)
    assert emb[0] == 0 and emb[1] == 1
    for a in range(4):
        for b in range(4):
            assert emb[small.mul(a, b)] == big.mul(emb[a], emb[b])
            assert emb[small.add(a, b)] == big.add(emb[a], emb[b])


def test_embedding_rejects_non_subfield():
    with pytest.raises(UsageError):
        get_field(2, 2).embedding(get_field(2, 3))


def test_header_round_trip(field):
    assert type(field).from_header(field.header()) == field


def test_bad_inputs():
    with pytest.raises(UsageError):
        get_field(4)
    with pytest.raises(UsageError):
        get_field(2, 0)
    F = get_field(2, 2)
    with pytest.raises(ZeroDivisionError):
        F.inv(0)
    with pytest.raises(UsageError):
        FieldElement(F, 1) + FieldElement(get_field(3), 1)


# -- invariants ---------------------------------------------------------------------------


@st.composite
def field_and_elems(draw, k=3):
    p, m = draw(st.sampled_from(FIELDS))
    F = get_field(p, m)
    return F, [draw(st.integers(0, F.q - 1)) for _ in range(k)]


@given(field_and_elems())
@settings(max_examples=300, deadline=None)
def test_field_axioms(fe):
    F, (a, b, c) = fe
    assert F.add(a, b) == F.add(b, a)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.add(a, F.neg(a)) == 0
    if a:
        assert F.mul(a, F.inv(a)) == 1


@given(field_and_elems())
@settings(max_examples=300, deadline=None)
def test_frobenius_is_additive_automorphism(fe):
    F, (a, b, _) = fe
    assert F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b))
    assert F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b))
    assert F.root(F.frob(a)) == a
    assert F.frob(F.root(a)) == a
    assert F.frob(a) == F.pow(a, F.p)


@given(field_and_elems(1))
def test_element_wrappers(fe):
    F, (a,) = fe
    x = FieldElement(F, a)
    assert pth_root(frobenius(x)) == x
    assert x ** F.q == x  # every element is a root of t^q - t
    assert (x - x) == FieldElement(F, 0)
