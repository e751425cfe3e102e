"""Set families with bounded pairwise intersections (combinatorial designs)."""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass
from itertools import combinations, islice, product

from .errors import IntegrityError, ParseError, UsageError
from .ff import get_field, prime_power


@dataclass(frozen=True)
class Design:
    ell: int
    n: int
    m: int
    r_max: int
    sets: tuple  # n sorted tuples of elements of [1, ell]
    note: str = ""

    def verify(self) -> "Design":
        """Exhaustive check of sizes, ranges and pairwise intersections."""
        if len(self.sets) != self.n:
            raise IntegrityError(f"design lists {len(self.sets)} sets, header says {self.n}")
        for i, s in enumerate(self.sets):
            if len(s) != self.m or len(set(s)) != self.m:
                raise IntegrityError(f"set {i} has {len(set(s))} elements, expected {self.m}")
            if any(not 1 <= x <= self.ell for x in s):
                raise IntegrityError(f"set {i} leaves the ground set [1, {self.ell}]")
        # all pairwise intersection sizes as a chunked incidence product
        inc = np.zeros((self.n, self.ell), dtype=np.float32)
        for i, s in enumerate(self.sets):
            inc[i, [x - 1 for x in s]] = 1.0
        chunk = 2048
        for lo in range(0, self.n, chunk):
            block = inc[lo : lo + chunk] @ inc.T
            for off in range(block.shape[0]):
                block[off, : lo + off + 1] = 0
            k = int(block.max()) if block.size else 0
            if k > self.r_max:
                i, j = np.unravel_index(int(block.argmax()), block.shape)
                raise IntegrityError(
                    f"sets {lo + i} and {j} share {k} > {self.r_max} elements"
                )
        return self

    def max_intersection(self) -> int:
        return max(
            (len(set(a) & set(b)) for a, b in combinations(self.sets, 2)), default=0
        )

    def to_text(self) -> str:
        lines = [f"# {self.note}"] if self.note else []
        lines.append(f"design ell {self.ell} n {self.n} m {self.m} rmax {self.r_max}")
        lines += [" ".join(map(str, s)) for s in self.sets]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Design":
        header = None
        sets = []
        note = ""
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                note = note or line[1:].strip()
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if header is None:
                toks = line.split()
                if (
                    len(toks) != 9
                    or toks[0] != "design"
                    or toks[1::2][1:] != ["n", "m", "rmax"]
                    or toks[1] != "ell"
                ):
                    raise ParseError("expected 'design ell <l> n <n> m <m> rmax <r>'", lineno)
                try:
                    header = [int(toks[i]) for i in (2, 4, 6, 8)]
                except ValueError:
                    raise ParseError("design header values must be integers", lineno) from None
                continue
            try:
                s = tuple(int(t) for t in line.split())
            except ValueError:
                raise ParseError(f"malformed set line {line!r}", lineno) from None
            if list(s) != sorted(set(s)):
                raise ParseError("set elements must be strictly increasing", lineno)
            sets.append(s)
        if header is None:
            raise ParseError("missing design header", None)
        ell, n, m, r = header
        try:
            return cls(ell, n, m, r, tuple(sets), note).verify()
        except IntegrityError as exc:
            raise ParseError(str(exc), None) from None


def rs_design(n: int, m: int, c: int, r: int) -> Design:
    """Graphs of tuples of c-1 polynomials of degree < r over F_m.

    The point (a, b_1, ..., b_{c-1}) of F_m x F_m^(c-1) is numbered
    1 + a + sum_t b_t m^t, field elements taken by their codes.  Tuples are
    enumerated in lexicographic order of their coefficient lists (first
    polynomial first, low degree first).
    """
    pp = prime_power(m)
    if pp is None:
        raise UsageError(f"m = {m} is not a prime power")
    if c < 2:
        raise UsageError(f"c = {c} must be at least 2 (ground set m^c with c - 1 polynomials)")
    if not 1 <= r <= m:
        raise UsageError(f"need 1 <= r <= m, got r = {r}")
    cap = m ** ((c - 1) * r)
    if not 1 <= n <= cap:
        raise UsageError(f"need 1 <= n <= m^((c-1)r) = {cap}, got n = {n}")
    F = get_field(*pp)
    points = list(range(m))

    def ev(coeffs, a):
        acc = 0
        for co in reversed(coeffs):
            acc = F.add(F.mul(acc, a), co)
        return acc

    sets = []
    for flat in islice(product(range(m), repeat=(c - 1) * r), n):
        polys = [flat[t * r : (t + 1) * r] for t in range(c - 1)]
        s = sorted(
            1 + a + sum(ev(q, a) * m ** (t + 1) for t, q in enumerate(polys)) for a in points
        )
        sets.append(tuple(s))
    note = f"rs-design m {m} c {c} r {r}; point (a,b) -> 1+a+sum b_t m^t; tuples in lex coefficient order"
    return Design(m**c, n, m, r, tuple(sets), note).verify()


def _greedy_scan(n: int, m: int, ell: int, r: int) -> list[tuple] | None:
    """Scan m-subsets of [1, ell] in lex order, accepting each one that meets every
    accepted set in at most r elements; a depth-first search that prunes prefixes
    which already meet some accepted set in more than r elements."""
    accepted: list[tuple] = []
    members: list[list[int]] = [[] for _ in range(ell + 1)]  # element -> accepted set ids
    counts: list[int] = []
    path: list[int] = []

    def dfs(start: int) -> bool:
        depth = len(path)
        if depth == m:
            sid = len(accepted)
            accepted.append(tuple(path))
            counts.append(m)
            for x in path:
                members[x].append(sid)
            return len(accepted) == n
        for x in range(start, ell - (m - depth) + 2):
            bad = False
            for sid in members[x]:
                counts[sid] += 1
                if counts[sid] > r:
                    bad = True
            before = len(accepted)
            path.append(x)
            done = (not bad) and dfs(x + 1)
            path.pop()
            for sid in members[x]:
                counts[sid] -= 1
            if done:
                return True
            # sets accepted below this node may already clash with the prefix
            if any(counts[sid] > r for sid in range(before, len(accepted))):
                return False
        return False

    return accepted if dfs(1) else None


def greedy_design(n: int, m: int, ell_hint: int | None = None) -> Design:
    if n < 1 or m < 1:
        raise UsageError("need n >= 1 and m >= 1")
    if n >= 2**m:
        raise UsageError(f"need n < 2^m, got n = {n}, m = {m}")
    r = math.ceil(math.log2(n)) if n > 1 else 0
    if ell_hint is not None:
        ell = max(ell_hint, m)
    elif r:
        ell = max(m, math.ceil(4 * m * m / r))
    else:
        ell = m
    while True:
        sets = _greedy_scan(n, m, ell, r)
        if sets is not None:
            break
        ell *= 2
    note = f"greedy-design lex scan, rmax ceil(log2 n) = {r}"
    return Design(ell, n, m, r, tuple(sets), note).verify()
