"""Sparse multivariate polynomials: the exact oracle behind every check.

A polynomial is a dict from exponent tuples to nonzero coefficients.  The
coefficient ring is either a finite field (coefficients are element codes)
or the integers (:data:`ZZ`, coefficients are Python ints).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from math import comb, prod
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, ParseError, ResourceError, UsageError
from .ff import FieldElement, FieldSpec
from .ir import Abp, Add, CircuitBuilder, Const, Input, Mul, ideg_bounds, metrics

DEGREE_CAP = 64
TERM_CAP = 10**6


class IntegerRing:
    """Coefficient-ring adaptor for integer polynomials."""

    p = 0
    q = None

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def pow(self, a, e):
        return a**e

    def header(self):
        return "ring ZZ"

    def format_code(self, a):
        return f"[{a}]"

    def parse_code(self, text, lineno=None):
        t = text.strip()
        if not (t.startswith("[") and t.endswith("]")):
            raise ParseError(f"malformed integer coefficient {text!r}", lineno)
        try:
            return int(t[1:-1])
        except ValueError:
            raise ParseError(f"malformed integer coefficient {text!r}", lineno) from None

    def __repr__(self):
        return "ZZ"


ZZ = IntegerRing()


def _coerce(ring, value) -> int:
    if isinstance(value, FieldElement):
        if value.field != ring:
            raise UsageError("coefficient belongs to a different field")
        return value.code
    v = int(value)
    if ring is ZZ:
        return v
    # ints are element codes, as everywhere else; in a prime field they reduce mod p
    if ring.m == 1:
        return v % ring.p
    if not 0 <= v < ring.q:
        raise UsageError(f"{v} is not an element code of {ring.name()}")
    return v


class SparsePoly:
    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field, nvars: int, terms: Mapping | Iterable = ()):
        self.field = field
        self.nvars = nvars
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for exp, c in items:
            exp = tuple(exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise UsageError(f"bad exponent vector {exp} for {nvars} variables")
            c = _coerce(field, c)
            if c:
                clean[exp] = c
        self.terms = clean

    @classmethod
    def _raw(cls, field, nvars, terms: dict) -> "SparsePoly":
        obj = object.__new__(cls)
        obj.field, obj.nvars, obj.terms = field, nvars, terms
        return obj

    @classmethod
    def zero(cls, field, nvars):
        return cls._raw(field, nvars, {})

    @classmethod
    def constant(cls, field, nvars, c):
        return cls(field, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, field, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls._raw(field, nvars, {tuple(e): 1})

    # -- basic queries --

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def ideg(self) -> int:
        """Largest individual degree over all variables; -1 for zero."""
        return max((max(e, default=0) for e in self.terms), default=-1)

    def ideg_vector(self) -> list[int]:
        out = [0] * self.nvars
        for e in self.terms:
            for i, k in enumerate(e):
                if k > out[i]:
                    out[i] = k
        return out

    def coefficient(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), 0)

    def sorted_terms(self) -> list[tuple]:
        """Graded-lex order: higher total degree first, then lexicographically larger first."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def __repr__(self):
        if not self.terms:
            return f"SparsePoly({self.field!r}, {self.nvars}, 0)"
        parts = []
        fmt = self.field.format_code
        for e, c in self.sorted_terms():
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            parts.append(f"{fmt(c)}{'*' + mono if mono else ''}")
        return " + ".join(parts)

    # -- arithmetic --

    def _check(self, other: "SparsePoly"):
        if self.field != other.field or self.nvars != other.nvars:
            raise UsageError("polynomials live in different rings")

    def _lift(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            self._check(other)
            return other
        return SparsePoly.constant(self.field, self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        add = self.field.add
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = add(out[e], c) if e in out else c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return SparsePoly._raw(self.field, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.neg
        return SparsePoly._raw(self.field, self.nvars, {e: neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "SparsePoly":
        c = _coerce(self.field, c)
        if not c:
            return SparsePoly.zero(self.field, self.nvars)
        mul = self.field.mul
        return SparsePoly._raw(self.field, self.nvars, {e: mul(c, v) for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            return self.scale(other)
        self._check(other)
        add, mul = self.field.add, self.field.mul
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = mul(c1, c2)
                if e in out:
                    v = add(out[e], v)
                out[e] = v
        return SparsePoly._raw(self.field, self.nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def frobenius_power(self, k: int) -> "SparsePoly":
        """f^(p^k) computed term-wise, valid in characteristic p."""
        F = self.field
        pk = F.p**k
        out = {}
        for e, c in self.terms.items():
            out[tuple(x * pk for x in e)] = F.pow(c, pk)
        return SparsePoly._raw(F, self.nvars, out)

    def __pow__(self, e: int):
        if e < 0:
            raise UsageError("negative exponent")
        one = SparsePoly.constant(self.field, self.nvars, 1)
        if self.field is ZZ:
            result, base = one, self
            while e:
                if e & 1:
                    result = result * base
                e >>= 1
                if e:
                    base = base * base
            return result
        # base-p digits of e; each digit block uses the cheap term-wise p^k power
        p = self.field.p
        result = one
        k = 0
        while e:
            d = e % p
            if d:
                block = self.frobenius_power(k)
                for _ in range(d):
                    result = result * block
            e //= p
            k += 1
        return result

    def monomial_shift(self, exp: Sequence[int]) -> "SparsePoly":
        """Multiply by the monomial x^exp."""
        return SparsePoly._raw(
            self.field,
            self.nvars,
            {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()},
        )

    # -- evaluation and substitution --

    def eval_codes(self, point: Sequence[int]):
        F = self.field
        add, mul, pw = F.add, F.mul, F.pow
        acc = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = mul(v, pw(x, k))
            acc = add(acc, v)
        return acc

    def eval(self, point: Sequence):
        if len(point) != self.nvars:
            raise UsageError(f"point has arity {len(point)}, polynomial has {self.nvars} variables")
        codes = [_coerce(self.field, x) for x in point]
        v = self.eval_codes(codes)
        return v if self.field is ZZ else FieldElement(self.field, v)

    def substitute(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        """Compose with polynomials sharing a ring: x_i -> images[i]."""
        if len(images) != self.nvars:
            raise UsageError(f"need {self.nvars} images, got {len(images)}")
        if not images:
            return self
        nv = images[0].nvars
        for g in images:
            if g.field != self.field or g.nvars != nv:
                raise UsageError("substitution images must share a ring")
        cache: dict = {}

        def pw(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i] ** k
            return cache[(i, k)]

        out = SparsePoly.zero(self.field, nv)
        for e, c in self.terms.items():
            term = SparsePoly.constant(self.field, nv, c)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            out = out + term
        return out

    def partial_assign(self, assignment: Mapping[int, object]) -> tuple["SparsePoly", dict]:
        """Set some variables to constants; remaining variables are renumbered densely."""
        F = self.field
        vals = {i: _coerce(F, v) for i, v in assignment.items()}
        keep = [i for i in range(self.nvars) if i not in vals]
        renum = {old: new for new, old in enumerate(keep)}
        out: dict = {}
        for e, c in self.terms.items():
            v = c
            for i, x in vals.items():
                if e[i]:
                    v = F.mul(v, F.pow(x, e[i]))
            if not v:
                continue
            ne = tuple(e[i] for i in keep)
            v = F.add(out[ne], v) if ne in out else v
            out[ne] = v
        return SparsePoly._raw(F, len(keep), {e: c for e, c in out.items() if c}), renum

    # -- text format --

    def to_text(self) -> str:
        fmt = self.field.format_code
        lines = [self.field.header(), f"nvars {self.nvars}"]
        for e, c in self.sorted_terms():
            lines.append(f"[{' '.join(map(str, e))}] : {fmt(c)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparsePoly":
        field = None
        nvars = None
        terms: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("field"):
                field = FieldSpec.from_header(line, lineno)
            elif line == "ring ZZ":
                field = ZZ
            elif line.startswith("nvars"):
                try:
                    nvars = int(line.split()[1])
                except (IndexError, ValueError):
                    raise ParseError("malformed nvars line", lineno) from None
            else:
                if field is None or nvars is None:
                    raise ParseError("field header and nvars must precede the terms", lineno)
                lhs, sep, rhs = line.partition(":")
                lhs = lhs.strip()
                if not sep or not (lhs.startswith("[") and lhs.endswith("]")):
                    raise ParseError(f"malformed term line {line!r}", lineno)
                try:
                    exp = tuple(int(t) for t in lhs[1:-1].split())
                except ValueError:
                    raise ParseError(f"malformed exponent vector {lhs!r}", lineno) from None
                if len(exp) != nvars or any(e < 0 for e in exp):
                    raise ParseError(f"exponent vector {lhs} does not match nvars {nvars}", lineno)
                if exp in terms:
                    raise ParseError(f"duplicate monomial {lhs}", lineno)
                c = field.parse_code(rhs, lineno)
                if c:
                    terms[exp] = c
        if field is None or nvars is None:
            raise ParseError("missing field header or nvars line", None)
        return cls._raw(field, nvars, terms)


# -- mod-p decomposition -----------------------------------------------------------------


@dataclass
class ModPDecomposition:
    field: FieldSpec
    nvars: int
    components: dict  # type vector -> SparsePoly (zero components omitted)

    @property
    def p(self) -> int:
        return self.field.p

    def component(self, a: Sequence[int]) -> SparsePoly:
        return self.components.get(tuple(a), SparsePoly.zero(self.field, self.nvars))

    def types(self):
        return cartesian(range(self.p), repeat=self.nvars)

    def recombine(self) -> SparsePoly:
        """Sum over types a of f_a^p * x^a."""
        out = SparsePoly.zero(self.field, self.nvars)
        for a, fa in self.components.items():
            out = out + (fa ** self.p).monomial_shift(a)
        return out


def poly_mod_p_decompose(f: SparsePoly) -> ModPDecomposition:
    F = f.field
    if F is ZZ:
        raise UsageError("mod-p decomposition needs a finite field")
    p = F.p
    comps: dict = {}
    for e, c in f.terms.items():
        a = tuple(x % p for x in e)
        comps.setdefault(a, {})[tuple(x // p for x in e)] = F.root(c)
    return ModPDecomposition(
        F, f.nvars, {a: SparsePoly._raw(F, f.nvars, t) for a, t in comps.items()}
    )


def pth_root_poly(f: SparsePoly) -> SparsePoly:
    F = f.field
    p = F.p
    for e in f.terms:
        if any(x % p for x in e):
            raise DomainError(
                f"not a pth power: term {F.format_code(f.terms[e])} * x^{list(e)} "
                f"has an exponent not divisible by {p}"
            )
    return poly_mod_p_decompose(f).component((0,) * f.nvars)


# -- Kronecker maps ----------------------------------------------------------------------


def kronecker_digits(g: SparsePoly, b: int) -> int:
    """Number of base-b digits of ideg(g); at least one."""
    if b < 2:
        raise UsageError("Kronecker base must be >= 2")
    d = max(g.ideg(), 0)
    k = 1
    while d >= b**k:
        k += 1
    return k


def kronecker_encode(g: SparsePoly, b: int, digits: int | None = None) -> SparsePoly:
    """Map x_i^e to prod_j y_{i,j}^{e_j} where e = sum_j e_j b^j; y_{i,j} has index i*K + j."""
    need = kronecker_digits(g, b)
    K = need if digits is None else digits
    if K < need:
        raise UsageError(f"{K} digits cannot hold individual degree {g.ideg()} in base {b}")
    out = {}
    for e, c in g.terms.items():
        y = []
        for x in e:
            for _ in range(K):
                y.append(x % b)
                x //= b
        out[tuple(y)] = c
    return SparsePoly._raw(g.field, g.nvars * K, out)


def kronecker_decode(f: SparsePoly, b: int, digits: int, nvars: int) -> SparsePoly:
    if f.nvars != nvars * digits:
        raise UsageError(f"expected {nvars * digits} variables, found {f.nvars}")
    if f.ideg() > b - 1:
        raise DomainError(f"individual degree {f.ideg()} exceeds base-{b} digit range")
    out = {}
    for e, c in f.terms.items():
        x = tuple(
            sum(e[i * digits + j] * b**j for j in range(digits)) for i in range(nvars)
        )
        out[x] = c
    return SparsePoly._raw(f.field, nvars, out)


# -- expansion of devices ----------------------------------------------------------------


def projected_terms(nvars: int, degree: int, ideg: Sequence[int]) -> int:
    return min(comb(nvars + degree, nvars), prod(d + 1 for d in ideg))


def _check_caps(device, degree_cap, term_cap):
    D = metrics(device).degree_bound
    if D > degree_cap:
        raise ResourceError(f"degree bound {D} exceeds the degree cap {degree_cap}")
    T = projected_terms(device.nvars, D, ideg_bounds(device))
    if T > term_cap:
        raise ResourceError(f"projected term count {T} exceeds the term cap {term_cap}")


def expand_all(device, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP) -> list[SparsePoly]:
    """Exact polynomial of every output."""
    _check_caps(device, degree_cap, term_cap)
    F, n = device.field, device.nvars
    if isinstance(device, Abp):
        incoming: dict = {}
        for e in device.edges:
            incoming.setdefault(e.dst, []).append(e)
        val: dict = {device.source: SparsePoly.constant(F, n, 1)}
        for v in device.order:
            if v == device.source:
                continue
            acc = SparsePoly.zero(F, n)
            for e in incoming.get(v, ()):
                src = val.get(e.src)
                if not src:
                    continue
                term = src.scale(e.coef)
                if e.var is not None:
                    shift = [0] * n
                    shift[e.var] = 1
                    term = term.monomial_shift(shift)
                acc = acc + term
            val[v] = acc
            if len(acc) > term_cap:
                raise ResourceError(f"intermediate term count {len(acc)} exceeds the term cap")
        return [val.get(t, SparsePoly.zero(F, n)) for t in device.sinks]

    gates = device.gates
    live = device.reachable()
    last_use = {}
    for k, g in enumerate(gates):
        if type(g) not in (Input, Const):
            last_use[g.left] = k
            last_use[g.right] = k
    keep = set(device.outputs)
    vals: dict = {}
    for k, g in enumerate(gates):
        if not live[k]:
            continue
        t = type(g)
        if t is Input:
            v = SparsePoly.var(F, n, g.var)
        elif t is Const:
            v = SparsePoly.constant(F, n, g.value)
        elif t is Add:
            v = vals[g.left].scale(g.lcoef) + vals[g.right].scale(g.rcoef)
        else:
            v = (vals[g.left] * vals[g.right]).scale(F.mul(g.lcoef, g.rcoef))
        if len(v) > term_cap:
            raise ResourceError(f"intermediate term count {len(v)} exceeds the term cap")
        vals[k] = v
        if t is Add or t is Mul:
            for child in (g.left, g.right):
                if last_use.get(child) == k and child not in keep:
                    vals.pop(child, None)
    return [vals[o] for o in device.outputs]


def expand(device, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP) -> SparsePoly:
    """Exact polynomial of a single-output device."""
    outs = expand_all(device, degree_cap, term_cap)
    if len(outs) != 1:
        raise UsageError(f"expected a single-output device, found {len(outs)} outputs")
    return outs[0]


def circuit_from_poly(f: SparsePoly):
    """Sum-of-monomials circuit with variable powers shared across monomials."""
    if f.field is ZZ:
        raise UsageError("circuits need a finite field")
    b = CircuitBuilder(f.field, f.nvars)
    if not f.terms:
        return b.build([b.const(0)])
    powers: dict = {}

    def power(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = b.power(b.input(i), k)
        return powers[(i, k)]

    terms = []
    for e, c in f.sorted_terms():
        factors = [power(i, k) for i, k in enumerate(e) if k]
        terms.append((b.product(factors), c))
    return b.build([b.sum(terms)])

