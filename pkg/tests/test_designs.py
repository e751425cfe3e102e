import math
from itertools import combinations, islice

import pytest
from hypothesis import given, settings, strategies as st

from charp.designs import Design, _greedy_scan, greedy_design, rs_design
from charp.errors import IntegrityError, ParseError, UsageError


def naive_lex_scan(n, m, ell, r):
    """Reference greedy: walk every m-subset in lex order, keep the compatible ones."""
    acc = []
    for s in combinations(range(1, ell + 1), m):
        if all(len(set(s) & set(t)) <= r for t in acc):
            acc.append(s)
            if len(acc) == n:
                return acc
    return None


def pairwise_ok(sets, r):
    return all(len(set(a) & set(b)) <= r for a, b in combinations(sets, 2))


# -- oracles ------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "n,m,ell,r",
    [(4, 3, 6, 1), (6, 3, 7, 1), (8, 4, 10, 2), (10, 4, 9, 2), (12, 5, 12, 2), (5, 3, 5, 1), (20, 4, 12, 1)],
)
def test_greedy_matches_naive_lex_scan(n, m, ell, r):
    assert _greedy_scan(n, m, ell, r) == naive_lex_scan(n, m, ell, r)


def test_rs_small_by_hand():
    # [DERIVED] degree < 2 polynomials over F_3 give 9 lines of the 3x3 grid
    d = rs_design(9, 3, 2, 2)
    assert d.ell == 9 and len(d.sets) == 9
    assert all(len(s) == 3 for s in d.sets)
    assert pairwise_ok(d.sets, 2)
    # graph of b = 0 is the column a = 0..2 at b = 0
    assert d.sets[0] == (1, 2, 3)


def test_rs_sets_are_polynomial_graphs():
    m, c, r = 4, 2, 2
    d = rs_design(16, m, c, r)
    for s in d.sets:
        pts = [((x - 1) % m, (x - 1) // m) for x in s]
        assert sorted(a for a, _ in pts) == list(range(m))  # one point per a


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("c", [2, 3])
def test_rs_full_capacity(m, c):
    for r in range(1, min(m, 3) + 1):
        n = m ** ((c - 1) * r)
        if n > 5**4:
            continue
        d = rs_design(n, m, c, r)
        assert d.ell == m**c and d.max_intersection() <= r


def test_rs_examples():
    d = rs_design(16, 2, 3, 2)
    assert d.ell == 8 and len(d.sets) == 16 and all(len(s) == 2 for s in d.sets)
    assert len(rs_design(1, 3, 2, 1).sets) == 1


@pytest.mark.parametrize(
    "args,msg",
    [((9, 6, 2, 2), "prime power"), ((9, 3, 2, 4), "r <= m"), ((10, 3, 2, 2), "n <= "), ((4, 3, 1, 2), "c = 1")],
)
def test_rs_rejects(args, msg):
    with pytest.raises(UsageError, match=msg):
        rs_design(*args)


def test_greedy_examples():
    d = greedy_design(2, 3)
    assert d.max_intersection() <= 1 and d.ell >= 6
    d = greedy_design(16, 8)
    assert d.r_max == 4 and d.ell <= 64 and d.max_intersection() <= 4


def test_greedy_rejects():
    with pytest.raises(UsageError):
        greedy_design(16, 4)


@given(st.integers(2, 20), st.integers(3, 6))
@settings(max_examples=25, deadline=None)
def test_greedy_property(n, m):
    if n >= 2**m:
        return
    d = greedy_design(n, m)
    r = math.ceil(math.log2(n))
    assert len(d.sets) == n and all(len(s) == m for s in d.sets)
    assert pairwise_ok(d.sets, r)


# -- verification and text ----------------------------------------------------------------


def test_verify_catches_bad_designs():
    with pytest.raises(IntegrityError, match="share"):
        Design(4, 2, 2, 0, ((1, 2), (2, 3))).verify()
    with pytest.raises(IntegrityError):
        Design(4, 2, 2, 1, ((1, 2), (3, 5))).verify()
    with pytest.raises(IntegrityError):
        Design(4, 2, 2, 1, ((1, 2),)).verify()


def test_text_round_trip():
    d = rs_design(9, 3, 3, 2)
    assert Design.from_text(d.to_text()) == d
    with pytest.raises(ParseError):
        Design.from_text("design ell 4 n 2 m 2 rmax 0\n1 2\n2 3\n")
    with pytest.raises(ParseError, match="line 2"):
        Design.from_text("design ell 4 n 1 m 2 rmax 0\n2 1\n")
