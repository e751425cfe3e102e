"""Straight-line programs over the integers with steps 1, +, -, x.

The length of a program is its number of steps; the shortest program for an
integer N is its tau-complexity.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb, factorial
from typing import Callable, NamedTuple

from .errors import IntegrityError, ParseError, UsageError
from .poly import ZZ, SparsePoly


class Step(NamedTuple):
    op: str  # one | add | sub | mul
    a: int = -1
    b: int = -1


@dataclass
class IntSlp:
    steps: list
    output: int
    report: list = dc_field(default_factory=list, compare=False)

    def __post_init__(self):
        for k, s in enumerate(self.steps):
            if s.op == "one":
                continue
            if s.op not in ("add", "sub", "mul"):
                raise UsageError(f"step {k}: unknown operation {s.op!r}")
            if not (0 <= s.a < k and 0 <= s.b < k):
                raise UsageError(f"step {k}: operands must reference earlier steps")
        if not 0 <= self.output < len(self.steps):
            raise UsageError("output does not name a step")

    def __len__(self):
        return len(self.steps)

    def to_text(self) -> str:
        lines = []
        for k, s in enumerate(self.steps):
            lines.append(f"step {k} one" if s.op == "one" else f"step {k} {s.op} {s.a} {s.b}")
        lines.append(f"output {self.output}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IntSlp":
        steps = []
        output = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            if toks[0] == "output":
                try:
                    output = int(toks[1])
                except (IndexError, ValueError):
                    raise ParseError("malformed output line", lineno) from None
                continue
            if toks[0] != "step" or len(toks) < 3:
                raise ParseError(f"malformed step line {line!r}", lineno)
            try:
                k = int(toks[1])
            except ValueError:
                raise ParseError(f"malformed step index {toks[1]!r}", lineno) from None
            if k != len(steps):
                raise ParseError(f"expected step {len(steps)}, found step {k}", lineno)
            op = toks[2]
            if op == "one" and len(toks) == 3:
                steps.append(Step("one"))
            elif op in ("add", "sub", "mul") and len(toks) == 5:
                try:
                    a, b = int(toks[3]), int(toks[4])
                except ValueError:
                    raise ParseError("operands must be step indices", lineno) from None
                if not (0 <= a < k and 0 <= b < k):
                    raise ParseError(f"step {k} references a later or missing step", lineno)
                steps.append(Step(op, a, b))
            else:
                raise ParseError(f"malformed step line {line!r}", lineno)
        if output is None:
            raise ParseError("missing output line", None)
        try:
            return cls(steps, output)
        except UsageError as exc:
            raise ParseError(str(exc), None) from None


def slp_eval(s: IntSlp) -> int:
    vals = []
    for st in s.steps:
        if st.op == "one":
            vals.append(1)
        elif st.op == "add":
            vals.append(vals[st.a] + vals[st.b])
        elif st.op == "sub":
            vals.append(vals[st.a] - vals[st.b])
        else:
            vals.append(vals[st.a] * vals[st.b])
    return vals[s.output]


class SlpBuilder:
    def __init__(self):
        self.steps: list[Step] = []
        self._one: int | None = None

    def _push(self, st: Step) -> int:
        self.steps.append(st)
        return len(self.steps) - 1

    def one(self) -> int:
        if self._one is None:
            self._one = self._push(Step("one"))
        return self._one

    def add(self, a, b):
        return self._push(Step("add", a, b))

    def sub(self, a, b):
        return self._push(Step("sub", a, b))

    def mul(self, a, b):
        return self._push(Step("mul", a, b))

    def const(self, n: int) -> int:
        """Binary expansion: doublings and +1 steps from the most significant bit."""
        if n < 0:
            return self.sub(self.const(0), self.const(-n))
        one = self.one()
        if n == 0:
            return self.sub(one, one)
        v = one
        for bit in bin(n)[3:]:
            v = self.add(v, v)
            if bit == "1":
                v = self.add(v, one)
        return v

    def square_times(self, v: int, k: int) -> int:
        for _ in range(k):
            v = self.mul(v, v)
        return v

    def embed(self, s: IntSlp) -> int:
        """Append another program's steps; returns the index of its output."""
        off = len(self.steps)
        for st in s.steps:
            if st.op == "one":
                self.steps.append(st)
            else:
                self.steps.append(Step(st.op, st.a + off, st.b + off))
        return s.output + off

    def build(self, output: int) -> IntSlp:
        return IntSlp(list(self.steps), output)


def slp_const(n: int) -> IntSlp:
    b = SlpBuilder()
    return b.build(b.const(n))


def slp_pow2(n: int) -> IntSlp:
    """2^n by square-and-multiply over the binary digits of n."""
    if n < 0:
        raise UsageError("n must be non-negative")
    b = SlpBuilder()
    one = b.one()
    if n == 0:
        return b.build(one)
    two = b.add(one, one)
    v = two
    for bit in bin(n)[3:]:
        v = b.mul(v, v)
        if bit == "1":
            v = b.mul(v, two)
    return b.build(v)


def central_binomial_constant(t: int) -> IntSlp:
    """Default oracle: C(2t, t) as a binary-expansion constant."""
    return slp_const(comb(2 * t, t))


def shamir_factorial_slp(
    n: int, binom_oracle: Callable[[int], IntSlp] = central_binomial_constant
) -> IntSlp:
    """n! via n! = (h!)^2 C(2h, h) (times n when n = 2h + 1).

    The report lists, per recursion level, n, the oracle length and the
    overhead steps spent at that level.
    """
    if n < 0:
        raise UsageError("n must be non-negative")
    b = SlpBuilder()
    report = []

    def fact(k: int) -> int:
        if k <= 1:
            return b.one()
        h = k // 2
        sub = fact(h)
        oracle = binom_oracle(h)
        got = slp_eval(oracle)
        if got != comb(2 * h, h):
            raise IntegrityError(f"binomial oracle returned {got} for C({2 * h}, {h})")
        start = len(b.steps)
        sq = b.mul(sub, sub)
        bo = b.embed(oracle)
        v = b.mul(sq, bo)
        const_len = 0
        if k % 2:
            before = len(b.steps)
            kc = b.const(k)
            const_len = len(b.steps) - before
            v = b.mul(v, kc)
        report.append(
            {
                "n": k,
                "oracle_length": len(oracle),
                "const_length": const_len,
                "level_length": len(b.steps) - start,
            }
        )
        return v

    out = fact(n)
    slp = b.build(out)
    slp.report = report
    return slp


def shamir_length_bound(report: list) -> int:
    """Telescoped recurrence with the recorded oracle and constant lengths:
    each level costs its oracle, the constant n when n is odd, and three products."""
    return 1 + sum(r["oracle_length"] + r["const_length"] + 3 for r in report)


def pow2_factorial_slp(n: int) -> IntSlp:
    """(2^n)! = prod_{i<n} C(2^(n-i), 2^(n-i-1))^(2^i), binomials as binary constants."""
    if n < 1:
        raise UsageError("n must be >= 1")
    b = SlpBuilder()
    acc = None
    for i in range(n):
        top = 2 ** (n - i)
        f = b.square_times(b.const(comb(top, top // 2)), i)
        acc = f if acc is None else b.mul(acc, f)
    slp = b.build(acc)
    if slp_eval(slp) != factorial(2**n):
        raise IntegrityError("product identity for (2^n)! failed")
    return slp


@dataclass
class WindowReport:
    n: int
    poly: SparsePoly  # in (y1, yn)
    identity_holds: bool  # f(x, x^n) == (x + 1)^(2n)
    missing_terms: list  # exponents k of (x+1)^(2n) absent from f(x, x^n)
    f01: int
    expected_f01: int  # C(2n, n) + 2

    @property
    def f01_matches(self) -> bool:
        return self.f01 == self.expected_f01


def binomial_window_poly(n: int) -> WindowReport:
    """f(y1, yn) = sum_{i,j<n} C(2n, i + jn) y1^i yn^j with its two identity checks."""
    if n < 2:
        raise UsageError("n must be >= 2")
    terms = {(i, j): comb(2 * n, i + j * n) for i in range(n) for j in range(n)}
    f = SparsePoly(ZZ, 2, terms)
    x = SparsePoly.var(ZZ, 1, 0)
    sub = f.substitute([x, x**n])
    target = (x + 1) ** (2 * n)
    missing = sorted(e[0] for e in target.terms if sub.coefficient(e) != target.terms[e])
    f01 = f.eval([0, 1])
    return WindowReport(n, f, sub == target, missing, f01, comb(2 * n, n) + 2)
