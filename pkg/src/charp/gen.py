"""Hitting-set generators and hitting sets obtained by evaluating them on grids.

A generator is a tuple of single-output circuits over seed variables
z_0..z_{l-1}.  Grids are enumerated in odometer order (last coordinate
fastest).  Circuits of the tested class are n-variate; seed points and
outputs are lists of element codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product as cartesian
from typing import Callable, Iterator, Sequence

from .designs import Design, greedy_design, rs_design
from .errors import DomainError, IntegrityError, ParseError, UsageError
from .ff import FieldSpec, prime_power, smallest_extension
from .ir import (
    Circuit,
    CircuitBuilder,
    Input,
    compose,
    evaluate_codes,
    lift,
    metrics,
    parse,
    restrict,
    serialize,
)
from .poly import SparsePoly, circuit_from_poly, expand, kronecker_encode


# -- hard families -----------------------------------------------------------------------


@dataclass(frozen=True)
class HardFamilyOracle:
    """A family d -> g_d of k-variate polynomials of degree <= d, with coefficient access."""

    k: int
    family: Callable[[int], SparsePoly]
    name: str = "family"

    def __call__(self, d: int) -> SparsePoly:
        g = self.family(d)
        if g.nvars > self.k or g.degree() > d:
            raise IntegrityError(
                f"oracle {self.name} returned {g.nvars} variables / degree {g.degree()} for d = {d}"
            )
        return g

    def coefficient(self, d: int, exp: Sequence[int]):
        return self(d).coefficient(exp)


def power_sum_oracle(F: FieldSpec, k: int) -> HardFamilyOracle:
    """g_d = x_1^d + ... + x_k^d."""

    def fam(d):
        return SparsePoly(F, k, {tuple(d if j == i else 0 for j in range(k)): 1 for i in range(k)})

    return HardFamilyOracle(k, fam, f"power-sum k={k}")


def monomial_oracle(F: FieldSpec, k: int, exps: Sequence[int] | None = None) -> HardFamilyOracle:
    """g_d = x^e with fixed exponents (default: x_1 * ... * x_k); degree-independent.

    Deliberately easy; used to engineer instances on which a generator fails.
    """
    e = tuple(exps) if exps is not None else (1,) * k

    def fam(d):
        return SparsePoly(F, k, {e: 1})

    return HardFamilyOracle(k, fam, f"monomial {list(e)}")


def pad_oracle(oracle: HardFamilyOracle, k: int) -> HardFamilyOracle:
    """The same family viewed on k >= oracle.k variables (extra variables unused)."""
    if k < oracle.k:
        raise UsageError("cannot pad to fewer variables")

    def fam(d):
        g = oracle(d)
        extra = (0,) * (k - g.nvars)
        return SparsePoly(g.field, k, {e + extra: c for e, c in g.terms.items()})

    return HardFamilyOracle(k, fam, f"{oracle.name} padded to {k}")


def hard_multilinear_from_family(oracle: HardFamilyOracle, d: int) -> SparsePoly:
    """Base-2 Kronecker image of g_d on k * (floor(log2 d) + 1) variables (multilinear)."""
    if d < 1:
        raise UsageError("degree must be >= 1")
    g = oracle(d)
    if g.nvars < oracle.k:
        g = pad_oracle(oracle, oracle.k)(d)
    return kronecker_encode(g, 2, digits=d.bit_length())


# -- generators --------------------------------------------------------------------------


@dataclass
class Generator:
    field: FieldSpec
    seed_len: int
    components: list  # single-output circuits on seed_len variables
    degree: int
    supports: list  # seed indices each component reads (0-based, sorted)
    provenance: list = dc_field(default_factory=list)
    params: object = None

    @property
    def nvars_out(self) -> int:
        return len(self.components)

    def __post_init__(self):
        for c in self.components:
            if c.nvars != self.seed_len or c.field != self.field:
                raise UsageError("every component must be a circuit on the seed variables")

    def evaluate_codes(self, seed: Sequence[int]) -> tuple:
        return tuple(evaluate_codes(c, seed)[0] for c in self.components)

    def lift(self, big: FieldSpec) -> "Generator":
        return Generator(
            big,
            self.seed_len,
            [lift(c, big) for c in self.components],
            self.degree,
            self.supports,
            self.provenance + [f"lifted to {big.name()}"],
        )

    def to_text(self, design_ref: str | None = None) -> str:
        lines = [f"# {p}" for p in self.provenance]
        lines.append(f"generator seed {self.seed_len} n {self.nvars_out} degree {self.degree}")
        if design_ref:
            lines.append(f"design {design_ref}")
        for i, c in enumerate(self.components):
            lines.append(f"component {i}")
            lines.append(serialize(c).rstrip("\n"))
            lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Generator":
        header = None
        comps = []
        prov = []
        buf: list | None = None
        start = 0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if buf is not None:
                if line == "end":
                    try:
                        comps.append(parse("\n".join(buf)))
                    except ParseError as exc:
                        line_no = None if exc.line is None else start + exc.line
                        raise ParseError(str(exc).split(": ", 1)[-1], line_no) from None
                    buf = None
                else:
                    buf.append(raw)
                continue
            if line.startswith("#"):
                prov.append(line[1:].strip())
            elif line.startswith("generator"):
                toks = line.split()
                try:
                    header = (int(toks[2]), int(toks[4]), int(toks[6]))
                except (IndexError, ValueError):
                    raise ParseError("expected 'generator seed <l> n <n> degree <D>'", lineno) from None
            elif line.startswith("design") or not line:
                continue
            elif line.startswith("component"):
                buf = []
                start = lineno
            else:
                raise ParseError(f"unexpected line {line!r}", lineno)
        if header is None:
            raise ParseError("missing generator header", None)
        if buf is not None:
            raise ParseError("unterminated component block", None)
        seed_len, n, degree = header
        if len(comps) != n or not comps:
            raise ParseError(f"header announces {n} components, found {len(comps)}", None)
        return cls(comps[0].field, seed_len, comps, degree, [_support(c) for c in comps], prov)


def _support(c: Circuit) -> list[int]:
    live = c.reachable()
    return sorted({g.var for k, g in enumerate(c.gates) if type(g) is Input and live[k]})


def _relabel(c: Circuit, nvars: int, var_map: Sequence[int]) -> Circuit:
    gates = [Input(var_map[g.var]) if type(g) is Input else g for g in c.gates]
    return Circuit(c.field, nvars, gates, c.outputs)


def identity_generator(F: FieldSpec, n: int) -> Generator:
    """G(z) = z; evaluated on a grid it yields the grid itself."""
    comps = []
    for i in range(n):
        b = CircuitBuilder(F, n)
        comps.append(b.build([b.input(i)]))
    return Generator(F, n, comps, 1, [[i] for i in range(n)], ["identity generator"])


def ki_generator(h: SparsePoly, n: int, design: Design) -> Generator:
    """G(z) = (h(z|S_1), ..., h(z|S_n)); variable j of h reads the j-th smallest element of S_i."""
    if design.m != h.nvars:
        raise UsageError(f"design set size {design.m} differs from the arity {h.nvars} of h")
    if design.n < n:
        raise UsageError(f"design has {design.n} sets, {n} needed")
    base = circuit_from_poly(h)
    comps, sups = [], []
    for S in design.sets[:n]:
        var_map = [x - 1 for x in S]
        comps.append(_relabel(base, design.ell, var_map))
        sups.append(sorted(var_map))
    D = max(metrics(c).degree_bound for c in comps)
    prov = [
        f"ki generator: h on {h.nvars} vars, degree {h.degree()}",
        f"design ell {design.ell} n {design.n} m {design.m} rmax {design.r_max}",
    ]
    return Generator(h.field, design.ell, comps, D, sups, prov)


def ki_generator_for_exponent(
    oracle: HardFamilyOracle, n: int, e: float, size_lower_bound: Callable[[int], float]
) -> Generator:
    """Pick d as the largest degree with size_lower_bound(d) <= n^e, then build the
    generator from the multilinear image of g_d and a greedy design."""
    target = n**e
    d = 1
    while size_lower_bound(d + 1) <= target:
        d += 1
    h = hard_multilinear_from_family(oracle, d)
    design = greedy_design(n, h.nvars)
    G = ki_generator(h, n, design)
    G.provenance.append(f"exponent e = {e}, chosen d = {d}")
    return G


# -- hitting sets ------------------------------------------------------------------------


@dataclass
class HittingSet:
    field: FieldSpec
    n: int
    count: int
    generator: Generator | None
    grid: list  # evaluation set S (codes)
    dedup: bool = False
    provenance: list = dc_field(default_factory=list)
    _points: list | None = None
    class_degree: int | None = None

    @property
    def evaluations(self) -> int:
        """Component evaluations needed to list every point."""
        return self.count * self.n if self.generator is not None else 0

    def __iter__(self) -> Iterator[tuple]:
        if self._points is not None:
            yield from self._points
            return
        seen = set()
        G = self.generator
        for seed in cartesian(self.grid, repeat=G.seed_len):
            pt = G.evaluate_codes(seed)
            if self.dedup:
                if pt in seen:
                    continue
                seen.add(pt)
            yield pt

    @property
    def points(self) -> list:
        if self._points is None:
            self._points = list(self)
            if self.dedup:
                self.count = len(self._points)
        return self._points

    def to_text(self) -> str:
        fmt = self.field.format_code
        lines = [f"# {p}" for p in self.provenance]
        pts = self.points
        lines.append(f"hitting-set n {self.n} count {len(pts)}")
        lines.append(self.field.header())
        lines += [" ".join(fmt(c) for c in pt) for pt in pts]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HittingSet":
        F = None
        header = None
        pts = []
        prov = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                prov.append(line[1:].strip())
                continue
            if not line:
                continue
            if line.startswith("hitting-set"):
                toks = line.split()
                try:
                    header = (int(toks[2]), int(toks[4]))
                except (IndexError, ValueError):
                    raise ParseError("expected 'hitting-set n <n> count <N>'", lineno) from None
            elif line.startswith("field"):
                F = FieldSpec.from_header(line, lineno)
            else:
                if F is None or header is None:
                    raise ParseError("headers must precede the points", lineno)
                elems = [t + "]" for t in line.split("]") if t.strip()]
                pt = tuple(F.parse_code(t, lineno) for t in elems)
                if len(pt) != header[0]:
                    raise ParseError(f"point has arity {len(pt)}, expected {header[0]}", lineno)
                pts.append(pt)
        if F is None or header is None:
            raise ParseError("missing hitting-set or field header", None)
        if len(pts) != header[1]:
            raise ParseError(f"header announces {header[1]} points, found {len(pts)}", None)
        if not pts:
            raise ParseError("a hitting set is nonempty", None)
        return cls(F, header[0], len(pts), None, [], False, prov, pts)


def hitting_set_from_generator(
    G: Generator, d: int, S: Sequence[int] | None = None, dedup: bool = False, field: FieldSpec | None = None
) -> HittingSet:
    """Evaluate G on S^seed_len with |S| >= d * deg(G) + 1.

    Without an explicit S the first d*D+1 elements of the field in canonical
    order are used, moving to the smallest extension large enough when needed.
    ``field`` names the field S lives in (an extension of G's field).
    """
    need = d * G.degree + 1
    F = field or G.field
    if S is None:
        if F.q < need:
            F = smallest_extension(F, need)
        S = F.canonical_elements(need)
    S = list(S)
    if len(set(S)) < need:
        raise UsageError(
            f"evaluation set has {len(set(S))} distinct elements; the Schwartz-Zippel "
            f"requirement |S| >= d*D + 1 = {need} fails"
        )
    if F != G.field:
        G = G.lift(F)
    count = len(S) ** G.seed_len
    prov = list(G.provenance) + [
        f"grid |S| = {len(S)} over {F.name()}, seed length {G.seed_len}, class degree {d}",
        f"points {count}, component evaluations {count * G.nvars_out}",
    ]
    return HittingSet(F, G.nvars_out, count, G, S, dedup, prov, class_degree=d)


def cube_hitting_set(F: FieldSpec, n: int, d: int) -> HittingSet:
    """Grid S^n with |S| = d + 1 (the identity generator), extending F when needed."""
    return hitting_set_from_generator(identity_generator(F, n), d)


# -- bootstrap instantiation -------------------------------------------------------------


def _next_prime_power(k: int) -> int:
    while prime_power(k) is None:
        k += 1
    return k


@dataclass
class BootstrapParams:
    k: int
    s: int
    c: int
    n: int
    r: int
    d: int
    m: int
    ell: int
    escalated: bool

    def hitting_set_size(self) -> int:
        """(s*d + 1)^ell points for grid size s*d + 1."""
        return (self.s * self.d + 1) ** self.ell

    def nominal_size(self) -> int:
        """The same count with c = 3, i.e. seed length k^3."""
        return (self.s * self.d + 1) ** (self.k**3)


def bootstrap_parameters(k: int, s: int) -> BootstrapParams:
    c, r = 3, 2
    n = 2 * k**4
    escalated = False
    while k ** ((c - 1) * r) < n:
        c += 1
        escalated = True
    return BootstrapParams(k, s, c, n, r, s**k, k, k**c, escalated)


def bootstrap_generator(oracle: HardFamilyOracle, s: int) -> Generator:
    """Generator (g_d(z|S_1), ..., g_d(z|S_n)) with c = 3, n = 2k^4, r = 2, d = s^k
    over the Reed-Solomon design of set size k on k^c points.

    If k is not a prime power the family is padded with unused variables; if the
    design capacity k^((c-1)r) is below n, c is raised to the smallest admissible value.
    """
    k0 = oracle.k
    k = _next_prime_power(max(k0, 2))
    if k != k0:
        oracle = pad_oracle(oracle, k)
    params = bootstrap_parameters(k, s)
    g = oracle(params.d)
    design = rs_design(params.n, params.m, params.c, params.r)
    base = circuit_from_poly(g)
    comps, sups = [], []
    for S in design.sets:
        var_map = [x - 1 for x in S]
        comps.append(_relabel(base, design.ell, var_map))
        sups.append(sorted(var_map))
    D = max(metrics(c).degree_bound for c in comps)
    prov = [
        f"bootstrap generator: k = {k}" + (f" (padded from {k0})" if k != k0 else ""),
        f"s = {s}, d = s^k = {params.d}, n = 2k^4 = {params.n}, r = {params.r}",
        f"c = {params.c}" + (" (raised from 3: design capacity k^4 < 2k^4)" if params.escalated else ""),
        f"seed length k^c = {design.ell}, family {oracle.name}",
    ]
    return Generator(g.field, design.ell, comps, D, sups, prov, params)


# -- hybrid argument ---------------------------------------------------------------------


@dataclass
class HybridResult:
    index: int  # 1-based crossover i: f_{i-1} != 0 and f_i = 0
    restricted: Circuit  # f-bar on (z|S_i, y_i)
    assignment: dict  # variable of the hybrid circuit -> code
    renumbering: dict  # surviving hybrid variable -> variable of f-bar
    field: FieldSpec
    y_var: int  # index of y_i inside f-bar
    seed_vars: list  # indices of z|S_i inside f-bar


def _hybrid_circuit(f: Circuit, G: Generator, i: int) -> Circuit:
    """f(G_1(z), ..., G_i(z), y_{i+1}, ..., y_n) on variables z_0..z_{l-1}, y_1..y_n."""
    L, n = G.seed_len, f.nvars
    nv = L + n
    comps = []
    for j in range(n):
        if j < i:
            comps.append(_relabel(G.components[j], nv, list(range(L))))
        else:
            b = CircuitBuilder(f.field, nv)
            comps.append(b.build([b.input(L + j)]))
    return compose(f, comps)


def hybrid_index(f: Circuit, G: Generator) -> HybridResult:
    """Locate i with f_{i-1} != 0 and f_i = 0, then fix every variable except z|S_i and y_i
    so that f_{i-1} stays nonzero."""
    if f.nvars != G.nvars_out:
        raise UsageError(f"f has {f.nvars} variables, the generator outputs {G.nvars_out}")
    if f.field != G.field:
        raise UsageError("f and the generator live over different fields")
    if not expand(f):
        raise DomainError("f is the zero polynomial")
    n, L = f.nvars, G.seed_len
    full = _hybrid_circuit(f, G, n)
    if expand(full):
        raise DomainError("f composed with the generator is nonzero; no hybrid crosses over")
    prev = expand(_hybrid_circuit(f, G, 0))
    i = None
    for j in range(1, n + 1):
        cur = expand(_hybrid_circuit(f, G, j))
        if not cur:
            i = j
            break
        prev = cur
    assert i is not None
    keep = set(G.supports[i - 1]) | {L + i - 1}
    to_fix = [v for v in range(L + n) if v not in keep]
    deg = max(prev.degree(), 0)
    F = f.field
    big = smallest_extension(F, deg + 1)
    grid = big.canonical_elements(deg + 1)
    work = prev
    if big != F:
        emb = F.embedding(big)
        work = SparsePoly._raw(big, prev.nvars, {e: emb[c] for e, c in prev.terms.items()})
    # fix variables one at a time; each step has at most deg bad values
    assignment = {}
    remaining = list(range(L + n))
    for v in to_fix:
        pos = remaining.index(v)
        for a in grid:
            trial, _ = work.partial_assign({pos: a})
            if trial:
                break
        else:
            raise IntegrityError(
                f"no value in a grid of {len(grid)} keeps the hybrid nonzero at variable {v} "
                f"(degree {deg}); this contradicts the root bound"
            )
        work = trial
        assignment[v] = a
        remaining.pop(pos)
    hybrid = _hybrid_circuit(f, G, i - 1)
    if big != F:
        hybrid = lift(hybrid, big)
    fbar, renum = restrict(hybrid, assignment)
    result = HybridResult(
        i, fbar, assignment, renum, big, renum[L + i - 1], [renum[z] for z in G.supports[i - 1]]
    )
    _check_hybrid(result, G)
    return result


def _check_hybrid(res: HybridResult, G: Generator):
    fb = expand(res.restricted)
    if not fb:
        raise IntegrityError("restricted hybrid is zero")
    # substitute y_i -> G_i(z|S_i) inside f-bar; the result must vanish
    Gi = G.components[res.index - 1]
    if res.field != G.field:
        Gi = lift(Gi, res.field)
    nv = res.restricted.nvars
    inv = {z: res.renumbering[z] for z in G.supports[res.index - 1]}
    var_map = [inv.get(v, 0) for v in range(G.seed_len)]
    gi = _relabel(Gi, nv, var_map)
    comps = []
    for v in range(nv):
        if v == res.y_var:
            comps.append(gi)
        else:
            b = CircuitBuilder(res.field, nv)
            comps.append(b.build([b.input(v)]))
    if expand(compose(res.restricted, comps)):
        raise IntegrityError("restricted hybrid does not vanish on the generator component")
