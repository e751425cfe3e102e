"""Computational devices: circuits, formulae and algebraic branching programs.

Gates are fan-in 2 with scalar labels on both incoming edges::

    Add(l, a, r, b) computes a*l + b*r
    Mul(l, a, r, b) computes (a*l) * (b*r)

All scalars are element codes of the device's field (see :mod:`charp.ff`).
Devices are immutable once constructed and are validated on construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field as dc_field
from typing import Mapping, NamedTuple, Sequence, Union

from .errors import ParseError, UsageError
from .ff import FieldElement, FieldSpec


class Input(NamedTuple):
    var: int


class Const(NamedTuple):
    value: int


class Add(NamedTuple):
    left: int
    lcoef: int
    right: int
    rcoef: int


class Mul(NamedTuple):
    left: int
    lcoef: int
    right: int
    rcoef: int


Gate = Union[Input, Const, Add, Mul]


@dataclass(frozen=True)
class Circuit:
    field: FieldSpec
    nvars: int
    gates: tuple
    outputs: tuple
    kind = "circuit"

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        self.validate()

    def validate(self):
        q, nv = self.field.q, self.nvars
        if nv < 0:
            raise UsageError("nvars must be non-negative")
        for k, g in enumerate(self.gates):
            t = type(g)
            if t is Input:
                if not 0 <= g.var < nv:
                    raise UsageError(f"gate {k}: variable index {g.var} out of range (nvars {nv})")
            elif t is Const:
                if not 0 <= g.value < q:
                    raise UsageError(f"gate {k}: constant out of range")
            elif t is Add or t is Mul:
                for child in (g.left, g.right):
                    if not 0 <= child < k:
                        raise UsageError(f"gate {k}: child {child} does not precede it")
                for c in (g.lcoef, g.rcoef):
                    if not 0 < c < q:
                        raise UsageError(f"gate {k}: edge coefficient must be a nonzero element")
            else:
                raise UsageError(f"gate {k}: unknown gate {g!r}")
        if not self.outputs:
            raise UsageError("device has no outputs")
        for o in self.outputs:
            if not 0 <= o < len(self.gates):
                raise UsageError(f"output {o} is not a gate")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise UsageError(f"expected a single-output device, found {len(self.outputs)} outputs")
        return self.outputs[0]

    def fanouts(self) -> list[int]:
        out = [0] * len(self.gates)
        for g in self.gates:
            if type(g) is Add or type(g) is Mul:
                out[g.left] += 1
                out[g.right] += 1
        return out

    def reachable(self) -> list[bool]:
        live = [False] * len(self.gates)
        for o in self.outputs:
            live[o] = True
        for k in range(len(self.gates) - 1, -1, -1):
            g = self.gates[k]
            if live[k] and (type(g) is Add or type(g) is Mul):
                live[g.left] = True
                live[g.right] = True
        return live

    def pruned(self) -> "Circuit":
        """Drop gates that no output depends on; order is otherwise preserved."""
        live = self.reachable()
        if all(live):
            return self
        remap = {}
        gates = []
        for k, g in enumerate(self.gates):
            if not live[k]:
                continue
            if type(g) is Add or type(g) is Mul:
                g = type(g)(remap[g.left], g.lcoef, remap[g.right], g.rcoef)
            remap[k] = len(gates)
            gates.append(g)
        return type(self)(self.field, self.nvars, gates, [remap[o] for o in self.outputs])

    def with_outputs(self, outputs: Sequence[int]) -> "Circuit":
        return type(self)(self.field, self.nvars, self.gates, outputs)


class Formula(Circuit):
    """A circuit whose underlying graph is a tree rooted at its single output."""

    kind = "formula"

    def validate(self):
        super().validate()
        if len(self.outputs) != 1:
            raise UsageError("a formula has exactly one output")
        fan = self.fanouts()
        root = self.outputs[0]
        for k, f in enumerate(fan):
            if k == root:
                if f != 0:
                    raise UsageError(f"gate {k}: the output gate of a formula has fan-out {f}")
            elif f != 1:
                raise UsageError(f"gate {k}: formula fan-out violation (fan-out {f})")


class AbpEdge(NamedTuple):
    src: int
    dst: int
    coef: int
    var: int | None = None  # None: constant label; otherwise coef * x_var


@dataclass(frozen=True)
class Abp:
    field: FieldSpec
    nvars: int
    nvertices: int
    edges: tuple
    source: int
    sinks: tuple
    kind = "abp"
    order: tuple = dc_field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(AbpEdge(*e) for e in self.edges))
        object.__setattr__(self, "sinks", tuple(self.sinks))
        self.validate()

    def validate(self):
        V, q = self.nvertices, self.field.q
        if not 0 <= self.source < V:
            raise UsageError("source is not a vertex")
        if not self.sinks:
            raise UsageError("device has no outputs")
        for t in self.sinks:
            if not 0 <= t < V:
                raise UsageError(f"sink {t} is not a vertex")
        indeg = [0] * V
        succ = [[] for _ in range(V)]
        for e in self.edges:
            if not (0 <= e.src < V and 0 <= e.dst < V):
                raise UsageError(f"edge {e.src}->{e.dst} uses an undeclared vertex")
            if not 0 < e.coef < q:
                raise UsageError(f"edge {e.src}->{e.dst}: label scalar must be nonzero")
            if e.var is not None and not 0 <= e.var < self.nvars:
                raise UsageError(f"edge {e.src}->{e.dst}: variable index {e.var} out of range")
            indeg[e.dst] += 1
            succ[e.src].append(e.dst)
        if indeg[self.source]:
            raise UsageError("source has an incoming edge")
        # Kahn's algorithm; ties broken by vertex id for a deterministic order
        remaining = list(indeg)
        ready = deque(v for v in range(V) if remaining[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for w in succ[v]:
                remaining[w] -= 1
                if remaining[w] == 0:
                    ready.append(w)
        if len(order) != V:
            raise UsageError("cycle detected in branching program")
        object.__setattr__(self, "order", tuple(order))

    @property
    def size(self) -> int:
        return self.nvertices

    @property
    def outputs(self) -> tuple:
        return self.sinks

    def pruned(self) -> "Abp":
        """Restrict to vertices on some source-to-sink path (sinks and source always kept)."""
        out_edges: dict[int, list] = {}
        for e in self.edges:
            out_edges.setdefault(e.src, []).append(e)
        fwd = {self.source}
        for v in self.order:
            if v in fwd:
                fwd.update(e.dst for e in out_edges.get(v, ()))
        bwd = set(self.sinks)
        for v in reversed(self.order):
            if any(e.dst in bwd for e in out_edges.get(v, ())):
                bwd.add(v)
        keep = (fwd & bwd) | {self.source} | set(self.sinks)
        ids = {v: i for i, v in enumerate(sorted(keep))}
        edges = [
            AbpEdge(ids[e.src], ids[e.dst], e.coef, e.var)
            for e in self.edges
            if e.src in fwd and e.src in bwd and e.dst in fwd and e.dst in bwd
        ]
        return Abp(
            self.field, self.nvars, len(ids), edges, ids[self.source], [ids[t] for t in self.sinks]
        )

    def with_sinks(self, sinks: Sequence[int]) -> "Abp":
        return Abp(self.field, self.nvars, self.nvertices, self.edges, self.source, sinks)


Device = Union[Circuit, Formula, Abp]


class CircuitBuilder:
    """Append-only gate list.  With ``share=True`` inputs and constants are deduplicated."""

    def __init__(self, field: FieldSpec, nvars: int, share: bool = True):
        self.field = field
        self.nvars = nvars
        self.share = share
        self.gates: list = []
        self._inputs: dict[int, int] = {}
        self._consts: dict[int, int] = {}

    def __len__(self):
        return len(self.gates)

    def _push(self, g) -> int:
        self.gates.append(g)
        return len(self.gates) - 1

    def input(self, var: int) -> int:
        if self.share and var in self._inputs:
            return self._inputs[var]
        k = self._push(Input(var))
        self._inputs.setdefault(var, k)
        return k

    def const(self, value: int) -> int:
        if self.share and value in self._consts:
            return self._consts[value]
        k = self._push(Const(value))
        self._consts.setdefault(value, k)
        return k

    def add(self, left: int, right: int, lcoef: int = 1, rcoef: int = 1) -> int:
        return self._push(Add(left, lcoef, right, rcoef))

    def mul(self, left: int, right: int, lcoef: int = 1, rcoef: int = 1) -> int:
        return self._push(Mul(left, lcoef, right, rcoef))

    def sum(self, terms: Sequence[tuple[int, int]]) -> int | None:
        """Balanced binary sum of ``(gate, coef)`` pairs; the result has coefficient one.

        Returns None for an empty sum.
        """
        if not terms:
            return None
        if len(terms) == 1:
            g, c = terms[0]
            if c == 1:
                return g
            return self.mul(g, self.const(1), c, 1)
        layer = list(terms)
        while len(layer) > 1:
            nxt = []
            for i in range(0, len(layer) - 1, 2):
                (a, ca), (b, cb) = layer[i], layer[i + 1]
                nxt.append((self.add(a, b, ca, cb), 1))
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0][0]

    def product(self, factors: Sequence[int]) -> int:
        """Balanced binary product; an empty product is the constant one."""
        if not factors:
            return self.const(1)
        layer = list(factors)
        while len(layer) > 1:
            nxt = [self.mul(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def power(self, g: int, e: int) -> int:
        """Square-and-multiply; adds at most 2*floor(log2 e) gates."""
        if e < 1:
            raise UsageError("exponent must be >= 1 (emit Const(1) explicitly for e = 0)")
        base = g
        bits = bin(e)[2:]
        result = base
        for bit in bits[1:]:
            result = self.mul(result, result)
            if bit == "1":
                result = self.mul(result, base)
        return result

    def copy(self, c: Circuit, var_map: Mapping[int, int] | None = None) -> list[int]:
        """Append the gates of ``c``; ``var_map`` sends c's variables to existing gates.

        Returns the index translation table for c's gates.
        """
        table = []
        live = c.reachable()
        for k, g in enumerate(c.gates):
            if not live[k]:
                table.append(-1)
                continue
            t = type(g)
            if t is Input:
                table.append(var_map[g.var] if var_map is not None else self.input(g.var))
            elif t is Const:
                table.append(self.const(g.value))
            elif t is Add:
                table.append(self.add(table[g.left], table[g.right], g.lcoef, g.rcoef))
            else:
                table.append(self.mul(table[g.left], table[g.right], g.lcoef, g.rcoef))
        return table

    def build(self, outputs: Sequence[int], kind: str = "circuit") -> Circuit:
        cls = Formula if kind == "formula" else Circuit
        return cls(self.field, self.nvars, self.gates, outputs)


# -- evaluation --------------------------------------------------------------------------


def _point_codes(device: Device, point: Sequence) -> list[int]:
    if len(point) != device.nvars:
        raise UsageError(f"point has arity {len(point)}, device has {device.nvars} variables")
    out = []
    for v in point:
        if isinstance(v, FieldElement):
            if v.field != device.field:
                raise UsageError("point coordinates belong to a different field")
            out.append(v.code)
        else:
            out.append(int(v) % device.field.q)
    return out


def evaluate_codes(device: Device, point: Sequence[int]) -> list[int]:
    """Evaluate at a point given as element codes; one code per output."""
    F = device.field
    add, mul = F.add, F.mul
    if isinstance(device, Abp):
        val = [0] * device.nvertices
        val[device.source] = 1
        incoming: dict[int, list] = {}
        for e in device.edges:
            incoming.setdefault(e.dst, []).append(e)
        for v in device.order:
            if v == device.source:
                continue
            acc = 0
            for e in incoming.get(v, ()):
                lab = e.coef if e.var is None else mul(e.coef, point[e.var])
                acc = add(acc, mul(lab, val[e.src]))
            val[v] = acc
        return [val[t] for t in device.sinks]
    vals = [0] * len(device.gates)
    for k, g in enumerate(device.gates):
        t = type(g)
        if t is Input:
            vals[k] = point[g.var]
        elif t is Const:
            vals[k] = g.value
        elif t is Add:
            vals[k] = add(mul(g.lcoef, vals[g.left]), mul(g.rcoef, vals[g.right]))
        else:
            vals[k] = mul(mul(g.lcoef, vals[g.left]), mul(g.rcoef, vals[g.right]))
    return [vals[o] for o in device.outputs]


def evaluate(device: Device, point: Sequence) -> list[FieldElement]:
    """Exact value of every output at ``point`` (FieldElements or codes)."""
    codes = evaluate_codes(device, _point_codes(device, point))
    return [FieldElement(device.field, c) for c in codes]


# -- metrics -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    size: int
    product_depth: int | None
    degree_bound: int


def gate_degrees(c: Circuit) -> list[int]:
    """Syntactic degree of every gate (Add: max, Mul: sum, Input: 1, Const: 0)."""
    deg = []
    for g in c.gates:
        t = type(g)
        if t is Input:
            deg.append(1)
        elif t is Const:
            deg.append(0)
        elif t is Add:
            deg.append(max(deg[g.left], deg[g.right]))
        else:
            deg.append(deg[g.left] + deg[g.right])
    return deg


def gate_product_depths(c: Circuit) -> list[int]:
    depth = []
    for g in c.gates:
        t = type(g)
        if t is Add:
            depth.append(max(depth[g.left], depth[g.right]))
        elif t is Mul:
            depth.append(1 + max(depth[g.left], depth[g.right]))
        else:
            depth.append(0)
    return depth


def abp_degrees(a: Abp) -> list[int]:
    """Per-vertex max number of variable edges on a source path (-1: unreachable)."""
    deg = [-1] * a.nvertices
    deg[a.source] = 0
    out_edges: dict[int, list] = {}
    for e in a.edges:
        out_edges.setdefault(e.src, []).append(e)
    for v in a.order:
        if deg[v] < 0:
            continue
        for e in out_edges.get(v, ()):
            d = deg[v] + (e.var is not None)
            if d > deg[e.dst]:
                deg[e.dst] = d
    return deg


def metrics(device: Device) -> Metrics:
    if isinstance(device, Abp):
        deg = abp_degrees(device)
        return Metrics(device.size, None, max(max(deg[t], 0) for t in device.sinks))
    deg = gate_degrees(device)
    depth = gate_product_depths(device)
    return Metrics(
        device.size,
        max(depth[o] for o in device.outputs),
        max(deg[o] for o in device.outputs),
    )


def ideg_bounds(device: Device) -> list[int]:
    """Syntactic bound on the individual degree of each variable over all outputs."""
    n = device.nvars
    if isinstance(device, Abp):
        best: list = [None] * device.nvertices
        best[device.source] = [0] * n
        out_edges: dict[int, list] = {}
        for e in device.edges:
            out_edges.setdefault(e.src, []).append(e)
        for v in device.order:
            if best[v] is None:
                continue
            for e in out_edges.get(v, ()):
                cand = list(best[v])
                if e.var is not None:
                    cand[e.var] += 1
                prev = best[e.dst]
                best[e.dst] = cand if prev is None else [max(a, b) for a, b in zip(prev, cand)]
        reach = [best[t] for t in device.sinks if best[t] is not None]
        return [max((r[i] for r in reach), default=0) for i in range(n)]
    per = []
    for g in device.gates:
        t = type(g)
        if t is Input:
            v = [0] * n
            v[g.var] = 1
        elif t is Const:
            v = [0] * n
        elif t is Add:
            v = [max(a, b) for a, b in zip(per[g.left], per[g.right])]
        else:
            v = [a + b for a, b in zip(per[g.left], per[g.right])]
        per.append(v)
    return [max(per[o][i] for o in device.outputs) for i in range(n)]


# -- constructions -----------------------------------------------------------------------


def build_power(c: Circuit, e: int) -> Circuit:
    """Append a square-and-multiply chain so the output computes f^e."""
    if e < 1:
        raise UsageError("build_power needs e >= 1; emit Const(1) explicitly for e = 0")
    out = c.output
    if e == 1:
        return c
    b = CircuitBuilder(c.field, c.nvars)
    b.gates = list(c.gates)
    return Circuit(c.field, c.nvars, b.gates, [b.power(out, e)])


def formula_power(f: Formula, e: int) -> Formula:
    """f^e as a formula: e fresh copies of f multiplied in a balanced tree."""
    if e < 1:
        raise UsageError("formula_power needs e >= 1")
    b = CircuitBuilder(f.field, f.nvars, share=False)
    roots = []
    for _ in range(e):
        table = b.copy(f)
        roots.append(table[f.output])
    return b.build([b.product(roots)], kind="formula")


def abp_power(a: Abp, e: int) -> Abp:
    """f^e as e copies of a single-sink program chained sink to source."""
    if e < 1:
        raise UsageError("abp_power needs e >= 1")
    if len(a.sinks) != 1:
        raise UsageError("abp_power needs a single-sink program")
    V = a.nvertices
    edges = []
    # copy k occupies ids k*V .. k*V+V-1; its source is glued onto the previous sink
    ids = []
    for k in range(e):
        table = {}
        for v in range(V):
            if k and v == a.source:
                table[v] = ids[-1][a.sinks[0]]
            else:
                table[v] = k * V + v
        ids.append(table)
        edges += [AbpEdge(table[x.src], table[x.dst], x.coef, x.var) for x in a.edges]
    out = Abp(a.field, a.nvars, e * V, edges, ids[0][a.source], [ids[-1][a.sinks[0]]])
    return out.pruned()


def restrict(device: Device, assignment: Mapping[int, object]):
    """Substitute constants for some variables and renumber the rest densely.

    Returns ``(restricted_device, renumbering)`` where ``renumbering`` maps each
    surviving old variable index to its new index.
    """
    F = device.field
    vals = {}
    for i, v in assignment.items():
        if not 0 <= i < device.nvars:
            raise UsageError(f"assigned variable {i} out of range")
        vals[i] = v.code if isinstance(v, FieldElement) else int(v) % F.q
    remaining = [i for i in range(device.nvars) if i not in vals]
    renum = {old: new for new, old in enumerate(remaining)}
    n2 = len(remaining)
    if isinstance(device, Abp):
        edges = []
        for e in device.edges:
            if e.var is None:
                edges.append(e)
            elif e.var in vals:
                c = F.mul(e.coef, vals[e.var])
                if c:
                    edges.append(AbpEdge(e.src, e.dst, c, None))
            else:
                edges.append(AbpEdge(e.src, e.dst, e.coef, renum[e.var]))
        out = Abp(F, n2, device.nvertices, edges, device.source, device.sinks).pruned()
        return out, renum
    gates = []
    for g in device.gates:
        if type(g) is Input:
            gates.append(Const(vals[g.var]) if g.var in vals else Input(renum[g.var]))
        else:
            gates.append(g)
    return type(device)(F, n2, gates, device.outputs), renum


def compose(f: Circuit, components: Sequence[Circuit]) -> Circuit:
    """Splice ``components[i]`` into every input gate x_i of ``f``.

    All components must share a field and arity; the result has their arity.
    """
    if len(components) != f.nvars:
        raise UsageError(f"need {f.nvars} components, got {len(components)}")
    if not components:
        return f
    nv = components[0].nvars
    for comp in components:
        if comp.nvars != nv or comp.field != f.field:
            raise UsageError("components must share field and arity")
    b = CircuitBuilder(f.field, nv)
    used = sorted({g.var for k, g in enumerate(f.gates) if type(g) is Input and f.reachable()[k]})
    var_map = {}
    for i in used:
        table = b.copy(components[i])
        var_map[i] = table[components[i].output]
    table = b.copy(f, var_map)
    return b.build([table[o] for o in f.outputs])


def lift(device: Device, big: FieldSpec) -> Device:
    """Re-express a device over an extension field through the canonical embedding."""
    if big == device.field:
        return device
    emb = device.field.embedding(big)
    if isinstance(device, Abp):
        edges = [AbpEdge(e.src, e.dst, emb[e.coef], e.var) for e in device.edges]
        return Abp(big, device.nvars, device.nvertices, edges, device.source, device.sinks)
    gates = []
    for g in device.gates:
        t = type(g)
        if t is Const:
            gates.append(Const(emb[g.value]))
        elif t is Input:
            gates.append(g)
        else:
            gates.append(t(g.left, emb[g.lcoef], g.right, emb[g.rcoef]))
    return type(device)(big, device.nvars, gates, device.outputs)


# -- text format ---------------------------------------------------------------------------


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _split_elements(rest: str, F: FieldSpec, lineno: int) -> list:
    """Tokenize ``a [c..] b [c..]`` style operand lists into ints and element codes."""
    out = []
    i = 0
    while i < len(rest):
        ch = rest[i]
        if ch.isspace():
            i += 1
        elif ch == "[":
            j = rest.find("]", i)
            if j < 0:
                raise ParseError("unterminated field element", lineno)
            out.append(("elem", F.parse_code(rest[i : j + 1], lineno)))
            i = j + 1
        else:
            j = i
            while j < len(rest) and not rest[j].isspace() and rest[j] != "[":
                j += 1
            tok = rest[i:j]
            try:
                out.append(("int", int(tok)))
            except ValueError:
                out.append(("word", tok))
            i = j
    return out


def parse(text: str) -> Device:
    """Parse the line-oriented device format; errors carry 1-based line numbers."""
    F = None
    nvars = None
    kind = "circuit"
    gates: list = []
    labels: dict[int, int] = {}
    outputs: list[int] = []
    vertices: dict[int, int] = {}
    edges: list = []
    source = None
    sinks: list[int] = []
    output_lines: list[int] = []

    def need_header(lineno):
        if F is None or nvars is None:
            raise ParseError("field header and nvars must precede the body", lineno)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        word = line.split()[0]
        if word == "field":
            F = FieldSpec.from_header(line, lineno)
            continue
        if word == "nvars":
            try:
                nvars = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("malformed nvars line", lineno) from None
            continue
        if word == "kind":
            toks = line.split()
            if len(toks) != 2 or toks[1] not in ("circuit", "formula", "abp"):
                raise ParseError(f"unknown device kind in {line!r}", lineno)
            kind = toks[1]
            continue
        need_header(lineno)
        toks = _split_elements(line, F, lineno)
        if word == "gate":
            if kind == "abp":
                raise ParseError("gate line in an abp file", lineno)
            if len(toks) < 3 or toks[1][0] != "int" or toks[2][0] != "word":
                raise ParseError(f"malformed gate line {line!r}", lineno)
            label, op = toks[1][1], toks[2][1]
            if label in labels:
                raise ParseError(f"duplicate gate label {label}", lineno)
            args = toks[3:]
            if op == "input":
                if len(args) != 1 or args[0][0] != "int":
                    raise ParseError("input gate takes one variable index", lineno)
                var = args[0][1]
                if not 0 <= var < nvars:
                    raise ParseError(f"variable index {var} out of range (nvars {nvars})", lineno)
                gates.append(Input(var))
            elif op == "const":
                if len(args) != 1 or args[0][0] != "elem":
                    raise ParseError("const gate takes one field element", lineno)
                gates.append(Const(args[0][1]))
            elif op in ("add", "mul"):
                if len(args) < 4 or len(args) % 2 or any(
                    args[i][0] != "int" or args[i + 1][0] != "elem" for i in range(0, len(args), 2)
                ):
                    raise ParseError(f"{op} gate takes pairs '<gate> [coef]'", lineno)
                operands = []
                for i in range(0, len(args), 2):
                    ref, coef = args[i][1], args[i + 1][1]
                    if ref not in labels:
                        raise ParseError(f"reference to gate {ref} which is not yet defined", lineno)
                    if coef == 0:
                        raise ParseError("edge coefficient is zero", lineno)
                    operands.append((labels[ref], coef))
                ctor = Add if op == "add" else Mul
                # n-ary operands become a balanced binary tree; only the leaves carry labels
                layer = operands
                while len(layer) > 1:
                    nxt = []
                    for i in range(0, len(layer) - 1, 2):
                        (a, ca), (b, cb) = layer[i], layer[i + 1]
                        gates.append(ctor(a, ca, b, cb))
                        nxt.append((len(gates) - 1, 1))
                    if len(layer) % 2:
                        nxt.append(layer[-1])
                    layer = nxt
            else:
                raise ParseError(f"unknown gate type {op!r}", lineno)
            labels[label] = len(gates) - 1
        elif word == "output":
            if kind == "abp":
                raise ParseError("use 'sink' lines in an abp file", lineno)
            for t, v in toks[1:]:
                if t != "int" or v not in labels:
                    raise ParseError(f"output refers to undefined gate {v}", lineno)
                outputs.append(labels[v])
                output_lines.append(lineno)
        elif word == "vertex":
            if len(toks) != 2 or toks[1][0] != "int":
                raise ParseError("malformed vertex line", lineno)
            if toks[1][1] in vertices:
                raise ParseError(f"duplicate vertex {toks[1][1]}", lineno)
            vertices[toks[1][1]] = len(vertices)
        elif word == "edge":
            if len(toks) < 5 or toks[1][0] != "int" or toks[2][0] != "int":
                raise ParseError(f"malformed edge line {line!r}", lineno)
            u, v, lab = toks[1][1], toks[2][1], toks[3][1]
            for w in (u, v):
                if w not in vertices:
                    raise ParseError(f"edge uses undeclared vertex {w}", lineno)
            u, v = vertices[u], vertices[v]
            rest = toks[4:]
            if lab == "const":
                if len(rest) != 1 or rest[0][0] != "elem":
                    raise ParseError("const edge takes one field element", lineno)
                if rest[0][1] == 0:
                    raise ParseError("edge coefficient is zero", lineno)
                edges.append(AbpEdge(u, v, rest[0][1], None))
            elif lab == "varmul":
                if len(rest) != 2 or rest[0][0] != "elem" or rest[1][0] != "int":
                    raise ParseError("varmul edge takes '[coef] <var>'", lineno)
                if rest[0][1] == 0:
                    raise ParseError("edge coefficient is zero", lineno)
                if not 0 <= rest[1][1] < nvars:
                    raise ParseError(f"variable index {rest[1][1]} out of range", lineno)
                edges.append(AbpEdge(u, v, rest[0][1], rest[1][1]))
            elif lab == "affine":
                # a0 + a1 x0 + ... as parallel edges; zero terms are skipped
                if len(rest) != nvars + 1 or any(t != "elem" for t, _ in rest):
                    raise ParseError(f"affine edge takes {nvars + 1} field elements", lineno)
                if rest[0][1]:
                    edges.append(AbpEdge(u, v, rest[0][1], None))
                for i, (_, c) in enumerate(rest[1:]):
                    if c:
                        edges.append(AbpEdge(u, v, c, i))
            else:
                raise ParseError(f"unknown edge label {lab!r}", lineno)
        elif word == "source":
            if len(toks) != 2 or toks[1][1] not in vertices:
                raise ParseError("source must name a declared vertex", lineno)
            source = vertices[toks[1][1]]
        elif word == "sink":
            for t, v in toks[1:]:
                if v not in vertices:
                    raise ParseError(f"sink {v} is not a declared vertex", lineno)
                sinks.append(vertices[v])
        else:
            raise ParseError(f"unknown directive {word!r}", lineno)

    if F is None or nvars is None:
        raise ParseError("missing field header or nvars line", None)
    try:
        if kind == "abp":
            if source is None:
                raise ParseError("missing source line", None)
            return Abp(F, nvars, len(vertices), edges, source, sinks)
        cls = Formula if kind == "formula" else Circuit
        return cls(F, nvars, gates, outputs)
    except ParseError:
        raise
    except UsageError as exc:
        line = output_lines[-1] if output_lines else None
        raise ParseError(str(exc), line) from None


def serialize(device: Device, comments: Sequence[str] = ()) -> str:
    """Canonical text: dense labels in topological (construction) order."""
    F = device.field
    fmt = F.format_code
    lines = [f"# {c}" for c in comments]
    lines += [F.header(), f"nvars {device.nvars}", f"kind {device.kind}"]
    if isinstance(device, Abp):
        for v in range(device.nvertices):
            lines.append(f"vertex {v}")
        for e in device.edges:
            if e.var is None:
                lines.append(f"edge {e.src} {e.dst} const {fmt(e.coef)}")
            else:
                lines.append(f"edge {e.src} {e.dst} varmul {fmt(e.coef)} {e.var}")
        lines.append(f"source {device.source}")
        lines.append("sink " + " ".join(str(t) for t in device.sinks))
        return "\n".join(lines) + "\n"
    for k, g in enumerate(device.gates):
        t = type(g)
        if t is Input:
            lines.append(f"gate {k} input {g.var}")
        elif t is Const:
            lines.append(f"gate {k} const {fmt(g.value)}")
        else:
            op = "add" if t is Add else "mul"
            lines.append(f"gate {k} {op} {g.left} {fmt(g.lcoef)} {g.right} {fmt(g.rcoef)}")
    lines.append("output " + " ".join(str(o) for o in device.outputs))
    return "\n".join(lines) + "\n"


def canonicalize(device: Device) -> Device:
    return device.pruned()
