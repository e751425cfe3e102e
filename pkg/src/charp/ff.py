"""Exact arithmetic in F_p and F_{p^m}.

Elements of ``F_{p^m}`` are stored internally as integer *codes*: the element
``c_0 + c_1 t + ... + c_{m-1} t^{m-1}`` (``t`` the class of ``x`` modulo the
field modulus) has code ``c_0 + c_1 p + ... + c_{m-1} p^{m-1}``.  Polynomials
and circuits carry codes; :class:`FieldElement` wraps a code together with its
field for the public API.

Fields of order up to ``2**16`` use exp/log/Zech tables; larger fields fall
back to schoolbook polynomial arithmetic.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, UsageError

TABLE_LIMIT = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# -- univariate polynomials over F_p, coefficient lists low degree first ----------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], f: Sequence[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _pmulmod(a: Sequence[int], b: Sequence[int], f: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def prime_power(q: int) -> tuple[int, int] | None:
    """(p, e) with q = p^e, or None when q is not a prime power."""
    if q < 2:
        return None
    fs = prime_factors(q)
    if len(fs) != 1:
        return None
    p, e = fs[0], 0
    while q % p == 0:
        q //= p
        e += 1
    return p, e


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin-style test: no roots in F_p and gcd(f, x^{p^i} - x) = 1 for i <= m/2."""
    f = list(f)
    m = len(f) - 1
    if m < 1 or f[-1] % p == 0:
        return False
    if m == 1:
        return True
    for r in range(p):
        if sum(c * pow(r, i, p) for i, c in enumerate(f)) % p == 0:
            return False
    xp = [0, 1]
    for _ in range(1, m // 2 + 1):
        # xp <- xp^p mod f
        acc, base, e = [1], xp, p
        while e:
            if e & 1:
                acc = _pmulmod(acc, base, f, p)
            base = _pmulmod(base, base, f, p)
            e >>= 1
        xp = acc
        diff = list(xp) + [0] * max(0, 2 - len(xp))
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(f, _trim(diff), p)) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def find_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree ``m`` over F_p.

    Candidates are ordered by the integer ``c_0 + c_1 p + ... + c_{m-1} p^{m-1}``
    of their non-leading coefficients, which is lexicographic order reading the
    polynomial from the highest degree down.  Returned low degree first.
    """
    if not is_prime(p):
        raise UsageError(f"p = {p} is not prime")
    if m < 1:
        raise UsageError(f"extension degree must be >= 1, got {m}")
    for code in range(p**m):
        f = [(code // p**i) % p for i in range(m)] + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("unreachable: irreducibles exist in every degree")


class FieldSpec:
    """The finite field F_{p^m} = F_p[t]/(modulus)."""

    def __init__(self, p: int, m: int = 1, modulus: Sequence[int] | None = None):
        if not is_prime(p):
            raise UsageError(f"p = {p} is not prime")
        if m < 1:
            raise UsageError(f"extension degree must be >= 1, got {m}")
        if modulus is None:
            modulus = find_irreducible(p, m)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise UsageError(f"modulus must be monic of degree {m}")
        if not is_irreducible(modulus, p):
            raise UsageError(f"modulus {list(modulus)} is reducible over F_{p}")
        self.p = p
        self.m = m
        self.modulus = modulus
        self.q = p**m
        self._tables = self.q <= TABLE_LIMIT and m > 1
        if self._tables:
            self._build_tables()

    # -- identity ------------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.m, self.modulus) == (
            other.p,
            other.m,
            other.modulus,
        )

    def __hash__(self):
        return hash((self.p, self.m, self.modulus))

    def __repr__(self):
        return f"FieldSpec(p={self.p}, m={self.m}, modulus={list(self.modulus)})"

    def header(self) -> str:
        mod = " ".join(str(c) for c in self.modulus)
        return f"field p {self.p} ext {self.m} modulus [{mod}]"

    @classmethod
    def from_header(cls, line: str, lineno: int | None = None) -> "FieldSpec":
        toks = line.replace("[", " [ ").replace("]", " ] ").split()
        try:
            if toks[0] != "field" or toks[1] != "p" or toks[3] != "ext" or toks[5] != "modulus":
                raise ValueError
            p, m = int(toks[2]), int(toks[4])
            if toks[6] != "[" or toks[-1] != "]":
                raise ValueError
            modulus = [int(t) for t in toks[7:-1]]
        except (IndexError, ValueError):
            raise ParseError(f"malformed field header {line!r}", lineno) from None
        try:
            return get_field(p, m, tuple(modulus))
        except UsageError as exc:
            raise ParseError(str(exc), lineno) from None

    # -- tables --------------------------------------------------------------------

    def _build_tables(self):
        q, p = self.q, self.p
        order = q - 1
        factors = prime_factors(order)
        gen = None
        for g in range(2, q):
            if all(self._slow_pow(g, order // r) != 1 for r in factors):
                gen = g
                break
        assert gen is not None
        exp = [0] * (2 * order)
        log = [0] * q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._slow_mul(x, gen)
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        self._exp, self._log, self.generator = exp, log, gen
        if p != 2:
            # zech[n] = log(1 + g^n), or -1 when 1 + g^n = 0
            zech = [0] * order
            for i in range(order):
                s = self._slow_add(1, exp[i])
                zech[i] = -1 if s == 0 else log[s]
            self._zech = zech

    def _digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.m):
            out.append(a % p)
            a //= p
        return out

    def _undigits(self, ds: Iterable[int]) -> int:
        code, scale = 0, 1
        for d in ds:
            code += (d % self.p) * scale
            scale *= self.p
        return code

    def _slow_add(self, a: int, b: int) -> int:
        return self._undigits(x + y for x, y in zip(self._digits(a), self._digits(b)))

    def _slow_mul(self, a: int, b: int) -> int:
        prod = _pmulmod(self._digits(a), self._digits(b), self.modulus, self.p)
        return self._undigits(prod)

    def _slow_pow(self, a: int, e: int) -> int:
        acc = 1
        while e:
            if e & 1:
                acc = self._slow_mul(acc, a)
            a = self._slow_mul(a, a)
            e >>= 1
        return acc

    # -- arithmetic on codes ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        if self._tables:
            if a == 0:
                return b
            if b == 0:
                return a
            la = self._log[a]
            z = self._zech[(self._log[b] - la) % (self.q - 1)]
            return 0 if z < 0 else self._exp[la + z]
        return self._slow_add(a, b)

    def neg(self, a: int) -> int:
        if self.m == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self._undigits(-d for d in self._digits(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.m == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        if self._tables:
            return self._exp[self._log[a] + self._log[b]]
        return self._slow_mul(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + self.name())
        if self.m == 1:
            return pow(a, self.p - 2, self.p)
        if self._tables:
            return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]
        return self._slow_pow(a, self.q - 2)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if e == 0:
            return 1
        if a == 0:
            return 0
        if self.m == 1:
            return pow(a, e, self.p)
        if self._tables:
            return self._exp[self._log[a] * e % (self.q - 1)]
        return self._slow_pow(a, e)

    def frob(self, a: int) -> int:
        return self.pow(a, self.p)

    def root(self, a: int) -> int:
        """pth root of a code: m - 1 Frobenius applications."""
        for _ in range(self.m - 1):
            a = self.frob(a)
        return a

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F."""
        return n % self.p

    # -- element API -----------------------------------------------------------------

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise UsageError("element belongs to a different field")
            return value
        if isinstance(value, int):
            return FieldElement(self, value % self.p)
        coeffs = list(value)
        if len(coeffs) > self.m:
            raise UsageError(f"too many coefficients for {self.name()}")
        return FieldElement(self, self._undigits(int(c) for c in coeffs))

    def element(self, code: int) -> "FieldElement":
        if not 0 <= code < self.q:
            raise UsageError(f"code {code} out of range for {self.name()}")
        return FieldElement(self, code)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def gen(self) -> "FieldElement":
        """The class of t, i.e. the polynomial-basis generator (t itself when m > 1)."""
        return FieldElement(self, self.p if self.m > 1 else 1)

    def primitive_element(self) -> int:
        """Smallest code generating the multiplicative group."""
        if self._tables:
            return self.generator
        if self.q == 2:
            return 1
        order = self.q - 1
        factors = prime_factors(order)
        return next(
            g for g in range(2, self.q) if all(self.pow(g, order // r) != 1 for r in factors)
        )

    def canonical_elements(self, size: int) -> list[int]:
        """The first ``size`` elements in canonical order: 0, then powers 1, g, g^2, ..."""
        if size > self.q:
            raise UsageError(f"{self.name()} has only {self.q} elements, {size} requested")
        if size <= 0:
            return []
        g = self.primitive_element()
        out, x = [0], 1
        for _ in range(size - 1):
            out.append(x)
            x = self.mul(x, g)
        return out

    def elements(self) -> Iterator["FieldElement"]:
        for c in range(self.q):
            yield FieldElement(self, c)

    def random_element(self, rng_seed=None) -> "FieldElement":
        return random_element(self, rng_seed)

    def name(self) -> str:
        return f"F_{self.p}" if self.m == 1 else f"F_{self.p}^{self.m}"

    def format_code(self, a: int) -> str:
        return "[" + " ".join(str(d) for d in self._digits(a)) + "]"

    def parse_code(self, text: str, lineno: int | None = None) -> int:
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ParseError(f"malformed field element {text!r}", lineno)
        try:
            digits = [int(t) for t in body[1:-1].split()]
        except ValueError:
            raise ParseError(f"malformed field element {text!r}", lineno) from None
        if len(digits) != self.m or any(not 0 <= d < self.p for d in digits):
            raise ParseError(
                f"element {text!r} must have {self.m} residues in [0, {self.p})", lineno
            )
        return self._undigits(digits)

    # -- subfields and extensions ------------------------------------------------------

    def extension(self, k: int) -> "FieldSpec":
        """The canonical field F_{p^{mk}}."""
        return get_field(self.p, self.m * k)

    def embedding(self, big: "FieldSpec") -> list[int]:
        """Table of the embedding ``self -> big`` (index = code in ``self``).

        The image of ``t`` is the smallest code in ``big`` that is a root of
        this field's modulus.
        """
        return list(_embedding(self, big))


@lru_cache(maxsize=None)
def _embedding(small: FieldSpec, big: FieldSpec) -> tuple[int, ...]:
    if small.p != big.p or big.m % small.m != 0:
        raise UsageError(f"{small.name()} does not embed in {big.name()}")
    if small.m == 1:
        return tuple(range(small.p))

    def ev(f, x):
        acc = 0
        for c in reversed(f):
            acc = big.add(big.mul(acc, x), c)
        return acc

    root = next(r for r in range(big.q) if ev(small.modulus, r) == 0)
    table = []
    for code in range(small.q):
        table.append(ev(small._digits(code), root))
    return tuple(table)


@lru_cache(maxsize=None)
def _cached_field(p: int, m: int, modulus: tuple[int, ...] | None) -> FieldSpec:
    return FieldSpec(p, m, modulus)


def get_field(p: int, m: int = 1, modulus: Sequence[int] | None = None) -> FieldSpec:
    """Shared FieldSpec instance (table construction is cached)."""
    if modulus is not None:
        modulus = tuple(int(c) for c in modulus)
        if is_prime(p) and m >= 1 and modulus == find_irreducible(p, m):
            modulus = None
    return _cached_field(p, m, modulus)


def smallest_extension(field: FieldSpec, size: int) -> FieldSpec:
    """Smallest canonical F_{p^{mk}} with at least ``size`` elements."""
    k = 1
    while field.q**k < size:
        k += 1
    return field if k == 1 else field.extension(k)


class FieldElement:
    """Immutable element of a :class:`FieldSpec`."""

    __slots__ = ("field", "code")

    def __init__(self, field: FieldSpec, code: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "code", code)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(self.field._digits(self.code))

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise UsageError(
                    f"mismatched fields {self.field.name()} and {other.field.name()}"
                )
            return other.code
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.add(self.code, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.sub(self.code, b))

    def __rsub__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.sub(b, self.code))

    def __mul__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.mul(self.code, b))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.code))

    def __truediv__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.mul(self.code, self.field.inv(b)))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.code, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.code))

    def frobenius(self) -> "FieldElement":
        return frobenius(self)

    def pth_root(self) -> "FieldElement":
        return pth_root(self)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.code == other.code
        if isinstance(other, int):
            return self.code == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.code))

    def __bool__(self):
        return self.code != 0

    def __repr__(self):
        return f"{self.field.name()}{self.field.format_code(self.code)}"

    def __str__(self):
        return self.field.format_code(self.code)


def field_arith(op: str, a: FieldElement, b: FieldElement | None = None) -> FieldElement:
    """Dispatch one of ``add, sub, mul, inv, neg``."""
    if op in ("inv", "neg"):
        if b is not None:
            raise UsageError(f"{op} takes one operand")
        if op == "neg":
            return -a
        if a.code == 0:
            raise ZeroDivisionError("inverse of zero")
        return a.inverse()
    if b is None:
        raise UsageError(f"{op} takes two operands")
    if a.field != b.field:
        raise UsageError(f"mismatched fields {a.field.name()} and {b.field.name()}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown field op {op!r}")


def frobenius(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.frob(a.code))


def pth_root(a: FieldElement) -> FieldElement:
    """The unique b with b^p = a, computed as a^{p^{m-1}}."""
    return FieldElement(a.field, a.field.root(a.code))


def random_element(spec: FieldSpec, rng_seed=None) -> FieldElement:
    """Uniform element; ``rng_seed`` may be an int seed or a ``random.Random``."""
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    return FieldElement(spec, rng.randrange(spec.q))


def check_same_field(*fields: FieldSpec) -> FieldSpec:
    first = fields[0]
    for f in fields[1:]:
        if f != first:
            raise UsageError(f"mismatched fields {first.name()} and {f.name()}")
    return first

