"""Device-to-device passes: mod-p decomposition, pth roots, Kronecker substitution,
and simulation of an extension field over a subfield.

The decomposition writes the polynomial f of a device as

    f = sum over types a in [p]^n of f_a^p * x^a

and builds a device for every f_a.  Intermediate pieces are handled as
*scaled references* ``(gate, coef)`` meaning ``coef * gate``; ``None`` marks a
piece that is structurally zero.  Scalars are folded into edge labels, so a
scaled reference costs no gate until it has to be materialized.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field as dc_field
from itertools import product as cartesian
from typing import Sequence

from .errors import IntegrityError, ResourceError, UsageError
from .ff import FieldSpec, get_field
from .ir import (
    Abp,
    AbpEdge,
    Add,
    Circuit,
    CircuitBuilder,
    Const,
    Formula,
    Input,
    Mul,
    metrics,
)
from .poly import SparsePoly, expand, expand_all, poly_mod_p_decompose, pth_root_poly

BLOWUP_BITS = 24
EXTENSION_CONSTANT = 4


def circuit_bound(s: int, p: int, n: int) -> int:
    return 3 * s * p ** (2 * n) + 2**n


def formula_bound(s: int, p: int, n: int, d: int) -> int:
    return 3 * s * n * p ** (n * (d + 3))


def abp_bound(s: int, p: int, n: int) -> int:
    return s * p**n


def provenance(op: str, before, after, bound: int | None, p: int, n: int) -> list[str]:
    lines = [
        f"transform {op}",
        f"input size {before.size}",
        f"output size {after.size}",
    ]
    if bound is not None:
        lines.append(f"size bound {bound}")
    lines += [f"p {p}", f"n {n}"]
    return lines


def _check_blowup(p: int, n: int, bits: int, projected: int, exponent: int = 1):
    if n * exponent * math.log2(p) > bits:
        raise ResourceError(
            f"blow-up p^{n * exponent} = {p}^{n * exponent} exceeds 2^{bits} "
            f"(projected output size {projected})"
        )


def _types(p: int, n: int) -> list[tuple]:
    return list(cartesian(range(p), repeat=n))


def _unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _verify_pth_power(device) -> SparsePoly:
    f = expand(device)
    pth_root_poly(f)  # raises DomainError naming a witness term
    return f


class _Emitter:
    """Builder wrapper that materializes scaled references and linear combinations."""

    def __init__(self, F: FieldSpec, nvars: int, share: bool = True):
        self.F = F
        self.b = CircuitBuilder(F, nvars, share=share)

    def one(self) -> int:
        return self.b.const(1)

    def combine(self, refs: Sequence) -> tuple | None:
        """Sum of scaled references; identical gates are merged first."""
        merged: dict = {}
        order = []
        add = self.F.add
        for ref in refs:
            if ref is None:
                continue
            g, c = ref
            if g in merged:
                merged[g] = add(merged[g], c)
            else:
                merged[g] = c
                order.append(g)
        terms = [(g, merged[g]) for g in order if merged[g]]
        if not terms:
            return None
        if len(terms) == 1:
            return terms[0]
        layer = terms
        while len(layer) > 1:
            nxt = []
            for i in range(0, len(layer) - 1, 2):
                (a, ca), (b, cb) = layer[i], layer[i + 1]
                nxt.append((self.b.add(a, b, ca, cb), 1))
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def materialize(self, ref) -> int:
        """A gate computing ``coef * gate`` (a fresh copy of the gate with scaled labels)."""
        b, F = self.b, self.F
        if ref is None:
            return b.const(0)
        g, c = ref
        if c == 1:
            return g
        gate = b.gates[g]
        t = type(gate)
        if t is Const:
            return b.const(F.mul(gate.value, c))
        if t is Add:
            return b.add(gate.left, gate.right, F.mul(gate.lcoef, c), F.mul(gate.rcoef, c))
        if t is Mul:
            return b.mul(gate.left, gate.right, F.mul(gate.lcoef, c), gate.rcoef)
        return b.mul(g, self.one(), c, 1)


# -- circuits ----------------------------------------------------------------------------


@dataclass
class DecomposedCircuit:
    circuit: Circuit
    index: dict  # type vector -> output position
    bound: int
    unpruned_size: int
    provenance: list = dc_field(default_factory=list)

    def component(self, a: Sequence[int]) -> Circuit:
        """Single-output circuit for one type, pruned."""
        return Circuit(
            self.circuit.field,
            self.circuit.nvars,
            self.circuit.gates,
            [self.circuit.outputs[self.index[tuple(a)]]],
        ).pruned()


def _monomial_lattice(em: _Emitter, n: int) -> dict:
    """Gates for x^e, e in {0,1}^n: Const(1), the inputs, and one product per other vector."""
    mono = {(0,) * n: em.one()}
    for i in range(n):
        mono[_unit(n, i)] = em.b.input(i)
    for e in sorted(cartesian((0, 1), repeat=n), key=lambda e: (sum(e), e[::-1])):
        if e in mono:
            continue
        hi = max(i for i in range(n) if e[i])
        rest = tuple(0 if i == hi else e[i] for i in range(n))
        mono[e] = em.b.mul(mono[rest], mono[_unit(n, hi)])
    return mono


def mod_p_decompose_circuit(
    phi: Circuit,
    blowup_bits: int = BLOWUP_BITS,
    prune: bool = True,
    verify: bool = False,
) -> DecomposedCircuit:
    """Circuit with p^n outputs, output a computing the component f_a."""
    F = phi.field
    p, n, s = F.p, phi.nvars, phi.size
    root = phi.output
    bound = circuit_bound(s, p, n)
    _check_blowup(p, n, blowup_bits, bound)
    em = _Emitter(F, n)
    mono = _monomial_lattice(em, n)
    one = mono[(0,) * n]
    live = phi.reachable()
    zero_t = (0,) * n
    comps: list = [None] * s
    for k, g in enumerate(phi.gates):
        if not live[k]:
            continue
        t = type(g)
        if t is Input:
            comps[k] = {_unit(n, g.var): (one, 1)}
        elif t is Const:
            comps[k] = {zero_t: (one, F.root(g.value))} if g.value else {}
        elif t is Add:
            ru, rw = F.root(g.lcoef), F.root(g.rcoef)
            U, W = comps[g.left], comps[g.right]
            out = {}
            for a in U.keys() | W.keys():
                refs = []
                if a in U:
                    refs.append((U[a][0], F.mul(ru, U[a][1])))
                if a in W:
                    refs.append((W[a][0], F.mul(rw, W[a][1])))
                r = em.combine(refs)
                if r is not None:
                    out[a] = r
            comps[k] = out
        else:
            r = F.root(F.mul(g.lcoef, g.rcoef))
            U, W = comps[g.left], comps[g.right]
            # group products by target type and carried monomial
            groups: dict = {}
            for bt, (gu, cu) in U.items():
                for ct, (gw, cw) in W.items():
                    tot = [x + y for x, y in zip(bt, ct)]
                    a = tuple(x % p for x in tot)
                    carry = tuple(x // p for x in tot)
                    prod_gate = em.b.mul(gu, gw, F.mul(r, cu), cw)
                    groups.setdefault(a, {}).setdefault(carry, []).append((prod_gate, 1))
            out = {}
            for a, by_carry in groups.items():
                refs = []
                for carry, terms in by_carry.items():
                    ref = em.combine(terms)
                    if ref is None:
                        continue
                    if any(carry):
                        refs.append((em.b.mul(ref[0], mono[carry], ref[1], 1), 1))
                    else:
                        refs.append(ref)
                ref = em.combine(refs)
                if ref is not None:
                    out[a] = ref
            comps[k] = out
    top = comps[root]
    types = _types(p, n)
    outputs = [em.materialize(top.get(a)) for a in types]
    c = Circuit(F, n, em.b.gates, outputs)
    if c.size > bound:
        raise IntegrityError(f"decomposition size {c.size} exceeds the bound {bound}")
    unpruned = c.size
    if prune:
        c = c.pruned()
    result = DecomposedCircuit(c, {a: i for i, a in enumerate(types)}, bound, unpruned)
    result.provenance = provenance("modp-decompose", phi, c, bound, p, n)
    if verify:
        _check_decomposition(phi, result)
    return result


def _check_decomposition(phi: Circuit, dec: DecomposedCircuit):
    truth = poly_mod_p_decompose(expand(phi))
    got = expand_all(dec.circuit)
    for a, i in dec.index.items():
        if got[i] != truth.component(a):
            raise IntegrityError(f"component {list(a)} disagrees with the polynomial oracle")


def pth_root_circuit(
    phi: Circuit, verify: bool = False, prune: bool = True, blowup_bits: int = BLOWUP_BITS
) -> Circuit:
    """Circuit for g given a circuit for g^p: the 0-type component of the decomposition."""
    if verify:
        f = _verify_pth_power(phi)
    dec = mod_p_decompose_circuit(phi, blowup_bits=blowup_bits, prune=False)
    zero = dec.index[(0,) * phi.nvars]
    out = dec.circuit.with_outputs([dec.circuit.outputs[zero]])
    if prune:
        out = out.pruned()
    if verify and expand(out) ** phi.field.p != f:
        raise IntegrityError("pth root disagrees with the polynomial oracle")
    return out


# -- formulae ----------------------------------------------------------------------------


def _formula_supports(phi: Circuit, p: int) -> list:
    n = phi.nvars
    sup: list = []
    for g in phi.gates:
        t = type(g)
        if t is Input:
            sup.append({_unit(n, g.var)})
        elif t is Const:
            sup.append({(0,) * n} if g.value else set())
        elif t is Add:
            sup.append(sup[g.left] | sup[g.right])
        else:
            sup.append(
                {tuple((x + y) % p for x, y in zip(b, c)) for b in sup[g.left] for c in sup[g.right]}
            )
    return sup


class _FormulaDecomposer:
    """Builds (v, a) * x^E as a fresh tree for every request.

    E in {0,1}^n is a pending monomial pushed towards the leaves.  At a product
    the carried monomial e joins E; T = E + e is split as ceil(T/2), floor(T/2)
    between the two children so each product of the input costs one product
    gate, and the monomial finally materializes at a leaf as a balanced tree.
    """

    def __init__(self, phi: Formula):
        self.phi = phi
        self.F = phi.field
        self.p = self.F.p
        self.n = phi.nvars
        self.sup = _formula_supports(phi, self.p)
        self.b = CircuitBuilder(self.F, self.n, share=False)

    def monomial(self, E: tuple, coef: int) -> tuple:
        b = self.b
        vars_ = [i for i, x in enumerate(E) if x]
        if not vars_:
            return (b.const(coef), 1)
        return (b.product([b.input(i) for i in vars_]), coef)

    def build(self, v: int, a: tuple, E: tuple):
        g = self.phi.gates[v]
        F, p, b = self.F, self.p, self.b
        if a not in self.sup[v]:
            return None
        t = type(g)
        if t is Input:
            return self.monomial(E, 1)
        if t is Const:
            return self.monomial(E, F.root(g.value))
        if t is Add:
            refs = []
            for child, coef in ((g.left, g.lcoef), (g.right, g.rcoef)):
                r = self.build(child, a, E)
                if r is not None:
                    refs.append((r[0], F.mul(F.root(coef), r[1])))
            return self._sum(refs)
        r = F.root(F.mul(g.lcoef, g.rcoef))
        refs = []
        for bt in sorted(self.sup[g.left]):
            ct = tuple((x - y) % p for x, y in zip(a, bt))
            if ct not in self.sup[g.right]:
                continue
            carry = tuple((x + y - z) // p for x, y, z in zip(bt, ct, a))
            T = [e + c for e, c in zip(E, carry)]
            EL = tuple((x + 1) // 2 for x in T)
            ER = tuple(x // 2 for x in T)
            lref = self.build(g.left, bt, EL)
            rref = self.build(g.right, ct, ER)
            refs.append((b.mul(lref[0], rref[0], F.mul(r, lref[1]), rref[1]), 1))
        return self._sum(refs)

    def _sum(self, refs: list):
        if not refs:
            return None
        if len(refs) == 1:
            return refs[0]
        layer = refs
        while len(layer) > 1:
            nxt = []
            for i in range(0, len(layer) - 1, 2):
                (x, cx), (y, cy) = layer[i], layer[i + 1]
                nxt.append((self.b.add(x, y, cx, cy), 1))
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def root_formula(self, a: tuple) -> Formula:
        self.b = CircuitBuilder(self.F, self.n, share=False)
        ref = self.build(self.phi.output, a, (0,) * self.n)
        b = self.b
        if ref is None:
            return b.build([b.const(0)], kind="formula")
        g, c = ref
        if c != 1:
            gate = b.gates[g]
            t = type(gate)
            if t is Const:
                b.gates[g] = Const(self.F.mul(gate.value, c))
            elif t is Add:
                b.gates[g] = Add(gate.left, self.F.mul(gate.lcoef, c), gate.right, self.F.mul(gate.rcoef, c))
            elif t is Mul:
                b.gates[g] = Mul(gate.left, self.F.mul(gate.lcoef, c), gate.right, gate.rcoef)
            else:
                g = b.add(g, b.const(0), c, 1)
        return b.build([g], kind="formula")


def _check_formula_result(phi: Formula, psi: Formula, p: int):
    n = phi.nvars
    d = metrics(phi).product_depth
    bound = formula_bound(phi.size, p, n, d)
    if psi.size > bound:
        raise IntegrityError(f"formula size {psi.size} exceeds the bound {bound}")
    depth_bound = d + math.ceil(math.log2(n)) if n > 1 else d
    if metrics(psi).product_depth > depth_bound:
        raise IntegrityError(f"product depth {metrics(psi).product_depth} exceeds {depth_bound}")


def mod_p_decompose_formula(
    phi: Formula, blowup_bits: int = BLOWUP_BITS, verify: bool = False
) -> dict:
    """One formula per type vector, each rebuilt from scratch (no sharing)."""
    if not isinstance(phi, Formula):
        raise UsageError("mod_p_decompose_formula needs a Formula")
    F = phi.field
    p, n = F.p, phi.nvars
    d = metrics(phi).product_depth
    _check_blowup(p, n, blowup_bits, formula_bound(phi.size, p, n, d), exponent=d + 3)
    dec = _FormulaDecomposer(phi)
    out = {}
    for a in _types(p, n):
        psi = dec.root_formula(a)
        _check_formula_result(phi, psi, p)
        out[a] = psi
    if verify:
        truth = poly_mod_p_decompose(expand(phi))
        for a, psi in out.items():
            if expand(psi) != truth.component(a):
                raise IntegrityError(f"component {list(a)} disagrees with the polynomial oracle")
    return out


def pth_root_formula(phi: Formula, verify: bool = False, blowup_bits: int = BLOWUP_BITS) -> Formula:
    if not isinstance(phi, Formula):
        raise UsageError("pth_root_formula needs a Formula")
    F = phi.field
    p, n = F.p, phi.nvars
    d = metrics(phi).product_depth
    if verify:
        f = _verify_pth_power(phi)
    _check_blowup(p, n, blowup_bits, formula_bound(phi.size, p, n, d), exponent=d + 3)
    psi = _FormulaDecomposer(phi).root_formula((0,) * n)
    _check_formula_result(phi, psi, p)
    if verify and expand(psi) ** p != f:
        raise IntegrityError("pth root disagrees with the polynomial oracle")
    return psi


# -- branching programs ------------------------------------------------------------------


def mod_p_decompose_abp(
    phi: Abp, blowup_bits: int = BLOWUP_BITS, prune: bool = True, verify: bool = False
) -> Abp:
    """Program on vertices (u, a); sink number i is (t, a_i) for the i-th type in lex order."""
    if len(phi.sinks) != 1:
        raise UsageError("mod-p decomposition of a branching program needs a single sink")
    F = phi.field
    p, n, s = F.p, phi.nvars, phi.size
    bound = abp_bound(s, p, n)
    _check_blowup(p, n, blowup_bits, bound)
    types = _types(p, n)
    tid = {a: i for i, a in enumerate(types)}
    P = len(types)

    def vid(u, a):
        return u * P + tid[a]

    edges = []
    for e in phi.edges:
        r = F.root(e.coef)
        for a in types:
            if e.var is None:
                edges.append(AbpEdge(vid(e.src, a), vid(e.dst, a), r, None))
                continue
            i = e.var
            nxt = a[:i] + ((a[i] + 1) % p,) + a[i + 1 :]
            var = i if a[i] == p - 1 else None
            edges.append(AbpEdge(vid(e.src, a), vid(e.dst, nxt), r, var))
    t = phi.sinks[0]
    psi = Abp(F, n, s * P, edges, vid(phi.source, (0,) * n), [vid(t, a) for a in types])
    if psi.size > bound:
        raise IntegrityError(f"vertex count {psi.size} exceeds the bound {bound}")
    if prune:
        psi = psi.pruned()
    if verify:
        truth = poly_mod_p_decompose(expand(phi))
        got = expand_all(psi)
        for a, g in zip(types, got):
            if g != truth.component(a):
                raise IntegrityError(f"component {list(a)} disagrees with the polynomial oracle")
    return psi


def pth_root_abp(phi: Abp, verify: bool = False, blowup_bits: int = BLOWUP_BITS) -> Abp:
    if verify:
        f = _verify_pth_power(phi)
    dec = mod_p_decompose_abp(phi, blowup_bits=blowup_bits, prune=False)
    out = dec.with_sinks([dec.sinks[0]]).pruned()
    if verify and expand(out) ** phi.field.p != f:
        raise IntegrityError("pth root disagrees with the polynomial oracle")
    return out


# -- Kronecker substitution --------------------------------------------------------------


@lru_cache(maxsize=None)
def addition_chain(e: int) -> tuple:
    """A shortest addition chain 1 = c_0 < ... < c_r = e, each c_k = c_i + c_j with i, j < k.

    Exhaustive (iterative deepening) up to 128, binary method above.
    """
    if e < 1:
        raise UsageError("chain target must be >= 1")
    if e > 128:
        chain = [1]
        for bit in bin(e)[3:]:
            chain.append(chain[-1] * 2)
            if bit == "1":
                chain.append(chain[-1] + 1)
        return tuple(chain)

    def search(chain: list, depth: int) -> bool:
        last = chain[-1]
        if last == e:
            return True
        if depth == 0 or last << depth < e:
            return False
        seen = set()
        for i in range(len(chain) - 1, -1, -1):
            for j in range(i, -1, -1):
                nxt = chain[i] + chain[j]
                if nxt <= last or nxt > e or nxt in seen:
                    continue
                seen.add(nxt)
                chain.append(nxt)
                if search(chain, depth - 1):
                    return True
                chain.pop()
        return False

    depth = 0
    while True:
        chain = [1]
        if search(chain, depth):
            return tuple(chain)
        depth += 1


def _chain_power(b: CircuitBuilder, g: int, e: int) -> int:
    gates = {1: g}
    chain = addition_chain(e)
    for k, c in enumerate(chain[1:], 1):
        # any earlier pair summing to c
        x = next(a for a in chain[:k] if c - a in gates)
        gates[c] = b.mul(gates[x], gates[c - x])
    return gates[e]


@dataclass
class KroneckerReport:
    added: int
    ladder_bound: int


def kronecker_substitution_circuit(device, base: int, digits: int, report: list | None = None):
    """Substitute y_{i,j} -> x_i^(base^j), where y_{i,j} is variable i*digits + j.

    Circuits and formulae yield a circuit (the powering ladders are shared);
    branching programs yield a branching program with each variable edge
    stretched into a path.
    """
    if base < 2 or digits < 1:
        raise UsageError("need base >= 2 and at least one digit")
    if device.nvars % digits:
        raise UsageError(f"arity {device.nvars} is not a multiple of the digit count {digits}")
    m = device.nvars // digits
    F = device.field
    if isinstance(device, Abp):
        V = device.nvertices
        edges = []
        for e in device.edges:
            if e.var is None:
                edges.append(e)
                continue
            i, j = divmod(e.var, digits)
            length = base**j
            path = [e.src] + list(range(V, V + length - 1)) + [e.dst]
            V += length - 1
            for k in range(length):
                edges.append(AbpEdge(path[k], path[k + 1], e.coef if k == 0 else 1, i))
        out = Abp(F, m, V, edges, device.source, device.sinks)
        if report is not None:
            report.append(KroneckerReport(V - device.nvertices, 0))
        return out
    b = CircuitBuilder(F, m)
    used = sorted({g.var for g in device.gates if type(g) is Input})
    rung: dict = {}
    for y in used:
        i, j = divmod(y, digits)
        for jj in range(j + 1):
            if (i, jj) in rung:
                continue
            rung[(i, jj)] = b.input(i) if jj == 0 else _chain_power(b, rung[(i, jj - 1)], base)
    var_map = {y: rung[divmod(y, digits)] for y in used}
    added = len(b)
    table = b.copy(device, var_map)
    out = b.build([table[o] for o in device.outputs])
    if report is not None:
        ladder_bound = m * digits * math.ceil(math.log2(base)) + m * digits
        report.append(KroneckerReport(added, ladder_bound))
    return out


# -- extension-field simulation ----------------------------------------------------------


@dataclass
class ExtensionSimulation:
    circuit: Circuit  # k outputs over the subfield
    base: FieldSpec
    basis: list  # codes of 1, t, ..., t^(k-1) in the big field
    constant: int = EXTENSION_CONSTANT

    def recombine(self, big: FieldSpec) -> SparsePoly:
        """Sum_j f_j * beta_j, mapped back into the big field."""
        emb = self.base.embedding(big)
        polys = expand_all(self.circuit)
        out = SparsePoly.zero(big, self.circuit.nvars)
        for fj, beta in zip(polys, self.basis):
            lifted = SparsePoly._raw(big, fj.nvars, {e: emb[c] for e, c in fj.terms.items()})
            out = out + lifted.scale(beta)
        return out


def simulate_extension(phi: Circuit, k: int | None = None) -> ExtensionSimulation:
    """Rewrite a circuit over F_(p^M) as k coordinate circuits over F_(p^(M/k)).

    Variables are assumed to range over the subfield; the basis is the power
    basis of the generator t of the big field.
    """
    big = phi.field
    M = big.m
    k = M if k is None else k
    if k < 1 or M % k:
        raise UsageError(f"k = {k} does not divide the extension degree {M}")
    small = get_field(big.p, M // k)
    emb = small.embedding(big)
    t = big.gen().code if M > 1 else 1
    basis = [big.pow(t, j) for j in range(k)]
    coords: dict = {}
    for cs in cartesian(range(small.q), repeat=k):
        v = 0
        for c, beta in zip(cs, basis):
            v = big.add(v, big.mul(emb[c], beta))
        coords[v] = cs
    if len(coords) != big.q:
        raise IntegrityError("power basis is not a basis")

    n = phi.nvars
    em = _Emitter(small, n)
    one = em.one()
    mat_cache: dict = {}

    def mat(alpha):
        # column i holds the coordinates of alpha * t^i
        if alpha not in mat_cache:
            mat_cache[alpha] = [coords[big.mul(alpha, beta)] for beta in basis]
        return mat_cache[alpha]

    conv_cache: dict = {}

    def conv(gamma):
        # coordinates of gamma * t^(i+l) for i + l <= 2k - 2
        if gamma not in conv_cache:
            conv_cache[gamma] = [coords[big.mul(gamma, big.pow(t, e))] for e in range(2 * k - 1)]
        return conv_cache[gamma]

    def scale_vec(vec, alpha):
        cols = mat(alpha)
        out = [[] for _ in range(k)]
        for i, ref in enumerate(vec):
            if ref is None:
                continue
            g, c = ref
            for j in range(k):
                if cols[i][j]:
                    out[j].append((g, small.mul(c, cols[i][j])))
        return out

    live = phi.reachable()
    vecs: list = [None] * phi.size
    for idx, g in enumerate(phi.gates):
        if not live[idx]:
            continue
        ty = type(g)
        if ty is Input:
            vecs[idx] = [(em.b.input(g.var), 1)] + [None] * (k - 1)
        elif ty is Const:
            vecs[idx] = [(one, c) if c else None for c in coords[g.value]]
        elif ty is Add:
            lu = scale_vec(vecs[g.left], g.lcoef)
            lw = scale_vec(vecs[g.right], g.rcoef)
            vecs[idx] = [em.combine(lu[j] + lw[j]) for j in range(k)]
        else:
            S = conv(big.mul(g.lcoef, g.rcoef))
            U, W = vecs[g.left], vecs[g.right]
            sums = [[] for _ in range(k)]
            for i, ur in enumerate(U):
                if ur is None:
                    continue
                for l, wr in enumerate(W):
                    if wr is None:
                        continue
                    prod_gate = em.b.mul(ur[0], wr[0], ur[1], wr[1])
                    for j in range(k):
                        if S[i + l][j]:
                            sums[j].append((prod_gate, S[i + l][j]))
            vecs[idx] = [em.combine(sums[j]) for j in range(k)]
    top = vecs[phi.output]
    outputs = [em.materialize(ref) for ref in top]
    c = Circuit(small, n, em.b.gates, outputs)
    limit = EXTENSION_CONSTANT * k**3 * phi.size
    if c.size > limit:
        raise IntegrityError(f"simulation size {c.size} exceeds {EXTENSION_CONSTANT}*k^3*s = {limit}")
    return ExtensionSimulation(c, small, basis)
