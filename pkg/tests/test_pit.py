import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from charp.errors import ResourceError, UsageError
from charp.ff import get_field
from charp.gen import cube_hitting_set, hitting_set_from_generator, identity_generator
from charp.ir import CircuitBuilder, build_power, evaluate_codes, lift
from charp.pit import find_witness, pit_bruteforce, pit_hitting_set, pit_random
from charp.poly import SparsePoly, expand
from charp.sampling import random_circuit

F2, F3, F4, F64 = get_field(2), get_field(3), get_field(2, 2), get_field(2, 6)


def xp_minus_x(F):
    b = CircuitBuilder(F, 1)
    x = b.input(0)
    return b.build([b.add(b.power(x, F.p), x, 1, F.neg(1))])


def roots_product(F, roots):
    b = CircuitBuilder(F, 1)
    x = b.input(0)
    return b.build([b.product([b.add(x, b.const(r), 1, F.neg(1)) for r in roots])])


# -- random -------------------------------------------------------------------------------


def test_random_single_variable():
    b = CircuitBuilder(F2, 1)
    v = pit_random(b.build([b.input(0)]), trials=20, set_size=2)
    assert not v.is_zero and v.witness == (1,)


def test_random_zero_has_error_bound():
    b = CircuitBuilder(F3, 2)
    x = b.input(0)
    c = b.build([b.add(x, x, 1, 2)])
    v = pit_random(c, trials=5)
    D = 1
    assert v.is_zero and v.error_bound == pytest.approx((D / (2 * D + 1)) ** 5)


def test_random_detection_rate_matches_analysis():
    # seven roots in F_64: a uniform point is a non-root with probability 57/64
    c = roots_product(F64, [1, 2, 3, 4, 5, 6, 7])
    hits = sum(not pit_random(c, trials=1, set_size=64, rng_seed=s).is_zero for s in range(1000))
    rate = hits / 1000
    exact = 57 / 64
    sigma = math.sqrt(exact * (1 - exact) / 1000)
    assert abs(rate - exact) <= 4 * sigma
    assert rate >= 1 - 7 / 64 - 4 * sigma


def test_random_is_deterministic():
    c = random_circuit(F4, 3, 10, 1)
    assert pit_random(c, rng_seed=5) == pit_random(c, rng_seed=5)


def test_random_rejects_bad_sizes():
    with pytest.raises(UsageError):
        pit_random(xp_minus_x(F2), set_size=0)


# -- hitting set --------------------------------------------------------------------------


def test_cube_finds_witness():
    b = CircuitBuilder(F2, 2)
    x0, x1 = b.input(0), b.input(1)
    c = b.build([b.add(b.mul(x0, x1), x1)])
    H = hitting_set_from_generator(identity_generator(F2, 2), 1)
    # multilinear but of degree 2, so the class check warns
    with pytest.warns(UserWarning, match="class degree"):
        v = pit_hitting_set(c, H)
    assert not v.is_zero and v.witness in {(0, 1), (1, 1)}


def test_cube_zero_uses_every_point():
    b = CircuitBuilder(F2, 2)
    H = hitting_set_from_generator(identity_generator(F2, 2), 1)
    v = pit_hitting_set(b.build([b.const(0)]), H)
    assert v.is_zero and v.evaluations == 4


def test_hitting_set_arity_and_warning():
    H = cube_hitting_set(F2, 3, 1)
    with pytest.raises(UsageError):
        pit_hitting_set(random_circuit(F2, 2, 5, 0), H)
    c = build_power(random_circuit(F2, 3, 5, 0), 4)
    with pytest.warns(UserWarning):
        pit_hitting_set(c, H)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_three_way_agreement(seed):
    c = random_circuit(F4, 3, 6, seed, max_degree=4)
    truth = not expand(c)
    H = cube_hitting_set(F4, 3, 4)
    assert pit_hitting_set(c, H).is_zero == truth
    assert pit_bruteforce(c).is_zero == truth
    if truth:
        assert pit_random(c).is_zero


# -- brute force --------------------------------------------------------------------------


def test_char_two_identity_is_zero():
    b = CircuitBuilder(F2, 1)
    x = b.input(0)
    sq = b.power(b.add(x, b.const(1)), 2)
    other = b.add(b.mul(x, x), b.const(1))
    c = b.build([b.add(sq, other, 1, 1)])
    assert pit_bruteforce(c).is_zero


@pytest.mark.parametrize("p", [2, 3, 5])
def test_functional_zero_is_not_syntactic_zero(p):
    F = get_field(p)
    c = xp_minus_x(F)
    assert all(evaluate_codes(c, [a])[0] == 0 for a in range(p))
    v = pit_bruteforce(c)
    assert not v.is_zero
    assert v.field.m > 1 and v.field.q >= p + 1
    assert evaluate_codes(lift(c, v.field), v.witness)[0] != 0


def test_find_witness_on_grid():
    f = SparsePoly(F2, 2, {(2, 0): 1, (1, 0): 1, (0, 2): 1, (0, 1): 1})
    # x^2 + x vanishes on F_2, so the witness needs F_4
    big, pt = find_witness(f)
    assert big == F4
    emb = F2.embedding(big)
    lifted = SparsePoly(big, 2, {e: emb[c] for e, c in f.terms.items()})
    assert lifted.eval_codes(pt) != 0


def test_brute_caps():
    b = CircuitBuilder(F2, 1)
    c = build_power(b.build([b.input(0)]), 1024)
    with pytest.raises(ResourceError):
        pit_bruteforce(c, degree_cap=64)


def test_json_shape():
    b = CircuitBuilder(F2, 1)
    v = pit_bruteforce(b.build([b.const(0)]))
    d = json.loads(v.to_json())
    assert d["is_zero"] is True and d["witness"] is None and d["error_bound"] is None
    assert d["method"] == "brute_force"
    v = pit_bruteforce(xp_minus_x(F2))
    d = json.loads(v.to_json())
    assert d["is_zero"] is False and len(d["witness"]) == 1
