"""Command-line front end: ``charp <command> ...``.

Exit status 0 on success, 1 on usage, parse or domain errors, 2 when a
resource cap would be exceeded.  Diagnostics go to stderr with a prefix naming
the error class; data goes to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .designs import Design, greedy_design, rs_design
from .errors import CharpError, IntegrityError, ResourceError, UsageError
from .ff import get_field
from .gen import (
    Generator,
    HittingSet,
    bootstrap_generator,
    cube_hitting_set,
    hitting_set_from_generator,
    ki_generator,
    monomial_oracle,
    power_sum_oracle,
)
from .intslp import (
    binomial_window_poly,
    pow2_factorial_slp,
    shamir_factorial_slp,
    slp_eval,
    slp_pow2,
)
from .ir import Abp, Circuit, CircuitBuilder, Formula, metrics, parse, serialize
from .pit import pit_bruteforce, pit_hitting_set, pit_random
from .poly import DEGREE_CAP, TERM_CAP, SparsePoly, expand, kronecker_decode, kronecker_encode
from .transform import (
    BLOWUP_BITS,
    KroneckerReport,
    kronecker_substitution_circuit,
    mod_p_decompose_abp,
    mod_p_decompose_circuit,
    mod_p_decompose_formula,
    provenance,
    pth_root_abp,
    pth_root_circuit,
    pth_root_formula,
    simulate_extension,
)

GRAMMARS = """\
file formats (one item per line, '#' starts a comment):

  device (circuit, formula or branching program)
    field p <p> ext <m> modulus [c_0 ... c_m]
    nvars <n>
    kind circuit|formula|abp
    gate <k> input <i>
    gate <k> const <elem>
    gate <k> add|mul <a> <elem> <b> <elem>     scaled children, a and b < k
    output <k> ...
    vertex <v>                                 abp only
    edge <u> <v> const <elem> | edge <u> <v> varmul <elem> <i>
    source <v> / sink <v> ...
  Elements are bracketed digit vectors [d_0 ... d_{m-1}], low degree first,
  so [3] in F_5 and [1 1] in F_4.

  polynomial:  field header, 'nvars <n>', then '[e_1 ... e_n] : <elem>' lines
  design:      'design ell <l> n <n> m <m> rmax <r>', then one sorted set per line
  generator:   'generator seed <l> n <n> degree <D>', then 'component <i>'
               device blocks each closed by 'end'
  hitting set: 'hitting-set n <n> count <N>', field header, one point per line
  slp:         'step <k> one|add i j|sub i j|mul i j', then 'output <k>'

exit status: 0 success, 1 usage/parse/domain error, 2 resource cap exceeded
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- io helpers --------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(args, text: str):
    if getattr(args, "out", None):
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _device(path: str):
    return parse(_read(path))


def _field(args):
    return get_field(args.p, args.ext)


def _caps(args) -> dict:
    if args.max_terms <= 0 or args.degree_cap <= 0:
        raise UsageError("caps must be positive")
    return {"degree_cap": args.degree_cap, "term_cap": args.max_terms}


# -- commands ----------------------------------------------------------------------------


def cmd_validate(args):
    dev = _device(args.input)
    m = metrics(dev)
    info = {
        "kind": dev.kind,
        "field": dev.field.header(),
        "nvars": dev.nvars,
        "size": m.size,
        "product_depth": m.product_depth,
        "degree_bound": m.degree_bound,
        "outputs": len(dev.outputs),
    }
    if args.json:
        _emit(args, json.dumps(info, separators=(",", ":")) + "\n")
    else:
        info["field"] = dev.field.name()
        _emit(args, "".join(f"{k} {v}\n" for k, v in info.items()))


def cmd_expand(args):
    dev = _device(args.input)
    _emit(args, expand(dev, **_caps(args)).to_text())


def _decompose(dev, args):
    prune = not args.no_prune
    p, n = dev.field.p, dev.nvars
    if isinstance(dev, Abp):
        out = mod_p_decompose_abp(dev, args.blowup_bits, prune=prune, verify=args.verify_oracle)
        return out, provenance("modp-decompose", dev, out, dev.size * p**n, p, n)
    if isinstance(dev, Formula):
        parts = mod_p_decompose_formula(dev, args.blowup_bits, verify=args.verify_oracle)
        # disjoint union: every output's subtree is still a formula
        b = CircuitBuilder(dev.field, n, share=False)
        outs = []
        for a in sorted(parts):
            outs.append(b.copy(parts[a])[parts[a].output])
        out = b.build(outs)
        prov = provenance("modp-decompose", dev, out, None, p, n)
        return out, prov + ["outputs are disjoint formulae, one per type in lex order"]
    dec = mod_p_decompose_circuit(dev, args.blowup_bits, prune=prune, verify=args.verify_oracle)
    return dec.circuit, dec.provenance + ["outputs: one per type in lex order"]


def cmd_transform(args):
    dev = _device(args.input)
    p, n = dev.field.p, dev.nvars
    op = args.op
    if op == "pth-root":
        if isinstance(dev, Abp):
            # the branching-program root is always pruned to its single sink
            out = pth_root_abp(dev, verify=args.verify_oracle, blowup_bits=args.blowup_bits)
        elif isinstance(dev, Formula):
            out = pth_root_formula(dev, verify=args.verify_oracle, blowup_bits=args.blowup_bits)
        else:
            out = pth_root_circuit(
                dev, verify=args.verify_oracle, prune=not args.no_prune, blowup_bits=args.blowup_bits
            )
        prov = provenance("pth-root", dev, out, None, p, n)
    elif op == "modp-decompose":
        out, prov = _decompose(dev, args)
    elif op == "kronecker-sub":
        if args.base is None or args.digits is None:
            raise UsageError("kronecker-sub needs --base and --digits")
        rep: list[KroneckerReport] = []
        before = expand(dev) if args.verify_oracle else None
        out = kronecker_substitution_circuit(dev, args.base, args.digits, rep)
        if before is not None:
            want = _power_substitution(before, args.base, args.digits)
            if expand(out) != want:
                raise IntegrityError("substituted device disagrees with the polynomial oracle")
        prov = provenance("kronecker-sub", dev, out, None, p, n) + [
            f"base {args.base} digits {args.digits} gates added {rep[0].added}"
        ]
    else:
        sim = simulate_extension(dev, args.k)
        out = sim.circuit
        if args.verify_oracle and sim.recombine(dev.field) != expand(dev):
            raise IntegrityError("coordinate circuits do not recombine to the input polynomial")
        basis = " ".join(dev.field.format_code(b) for b in sim.basis)
        prov = provenance("simulate-ext", dev, out, None, p, n) + [
            f"from {dev.field.name()} to {out.field.name()}, basis {basis}",
            f"constant {sim.constant}",
        ]
    _emit(args, serialize(out, prov))


def _power_substitution(f: SparsePoly, base: int, digits: int) -> SparsePoly:
    """Image of f(y) under y_(i,j) -> x_i^(base^j)."""
    m = f.nvars // digits
    terms: dict = {}
    F = f.field
    for e, c in f.terms.items():
        x = [0] * m
        for v, k in enumerate(e):
            i, j = divmod(v, digits)
            x[i] += k * base**j
        x = tuple(x)
        terms[x] = F.add(terms.get(x, 0), c)
    return SparsePoly(F, m, {e: c for e, c in terms.items() if c})


def cmd_encode(args):
    g = SparsePoly.from_text(_read(args.input))
    f = kronecker_encode(g, args.base, args.digits)
    digits = f.nvars // max(g.nvars, 1) if g.nvars else 0
    header = f"# kronecker base {args.base} digits {digits} from {g.nvars} variables\n"
    _emit(args, header + f.to_text())


def cmd_decode(args):
    f = SparsePoly.from_text(_read(args.input))
    if args.digits is None or args.nvars is None:
        raise UsageError("decode needs --digits and --nvars")
    _emit(args, kronecker_decode(f, args.base, args.digits, args.nvars).to_text())


def cmd_design(args):
    if args.kind == "rs":
        for name in ("n", "m", "c", "r"):
            if getattr(args, name) is None:
                raise UsageError(f"design rs needs --{name}")
        d = rs_design(args.n, args.m, args.c, args.r)
    else:
        if args.n is None or args.m is None:
            raise UsageError("design greedy needs --n and --m")
        d = greedy_design(args.n, args.m, args.ell)
    _emit(args, d.to_text())


def cmd_gen(args):
    if args.kind == "ki":
        if not (args.poly and args.design):
            raise UsageError("gen ki needs --poly and --design")
        h = SparsePoly.from_text(_read(args.poly))
        d = Design.from_text(_read(args.design))
        G = ki_generator(h, args.n or d.n, d)
        _emit(args, G.to_text(args.design))
    elif args.kind == "bootstrap":
        F = _field(args)
        if args.family == "power-sum":
            oracle = power_sum_oracle(F, args.k)
        else:
            oracle = monomial_oracle(F, args.k)
        G = bootstrap_generator(oracle, args.s)
        _emit(args, G.to_text())
    else:
        if not args.input or args.at is None:
            raise UsageError("gen eval needs --in and --at")
        G = Generator.from_text(_read(args.input))
        seed = _parse_point(G.field, args.at)
        if len(seed) != G.seed_len:
            raise UsageError(f"seed point has {len(seed)} coordinates, expected {G.seed_len}")
        pt = G.evaluate_codes(seed)
        _emit(args, " ".join(G.field.format_code(c) for c in pt) + "\n")


def _parse_point(F, text: str) -> list[int]:
    """Bracketed elements, or bare integer codes sum d_i p^i."""
    if "[" in text:
        return [F.parse_code(t.strip() + "]") for t in text.split("]") if t.strip()]
    try:
        codes = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"malformed point {text!r}") from None
    if any(not 0 <= c < F.q for c in codes):
        raise UsageError(f"element codes must lie in [0, {F.q})")
    return codes


def cmd_hitting_set(args):
    if args.cube:
        if args.n is None:
            raise UsageError("a cube hitting set needs --n")
        H = cube_hitting_set(_field(args), args.n, args.degree)
    else:
        if not args.gen:
            raise UsageError("hitting-set build needs --gen or --cube")
        G = Generator.from_text(_read(args.gen))
        H = hitting_set_from_generator(G, args.degree, dedup=args.dedup)
    if args.dedup:
        H.dedup = True
    H.provenance.append(f"class degree {args.degree}")
    _emit(args, H.to_text())


def _verdict_text(v, args) -> str:
    if args.json:
        return v.to_json() + "\n"
    lines = [f"is_zero {str(v.is_zero).lower()}", f"method {v.method}", f"field {v.field.name()}"]
    if v.witness is not None:
        lines.append("witness " + " ".join(v.field.format_code(c) for c in v.witness))
    if v.error_bound is not None:
        lines.append(f"error_bound {v.error_bound!r}")
    lines.append(f"evaluations {v.evaluations}")
    return "\n".join(lines) + "\n"


def cmd_pit(args):
    c = _device(args.input)
    if not isinstance(c, Circuit):
        raise UsageError("identity tests take circuits or formulae")
    if args.method == "random":
        v = pit_random(c, args.trials, args.set_size, args.seed)
    elif args.method == "hitting-set":
        if not args.hs:
            raise UsageError("pit hitting-set needs --hs")
        H = HittingSet.from_text(_read(args.hs))
        v = pit_hitting_set(c, H)
    else:
        v = pit_bruteforce(c, **_caps(args))
    _emit(args, _verdict_text(v, args))


def cmd_slp(args):
    if args.kind == "window":
        r = binomial_window_poly(args.n)
        lines = [
            f"# n {r.n}",
            f"# identity f(x, x^n) = (x+1)^(2n): {'holds' if r.identity_holds else 'fails'}"
            + (f", missing exponents {r.missing_terms}" if r.missing_terms else ""),
            f"# f(0,1) = {r.f01}, C(2n,n)+2 = {r.expected_f01}"
            + ("" if r.f01_matches else " (mismatch)"),
        ]
        _emit(args, "\n".join(lines) + "\n" + r.poly.to_text())
        return
    build = {"pow2": slp_pow2, "factorial": shamir_factorial_slp, "pow2-factorial": pow2_factorial_slp}
    s = build[args.kind](args.n)
    text = f"# value {slp_eval(s)}\n# length {len(s)}\n" + s.to_text()
    if args.out:
        _emit(args, text)
    sys.stdout.write(f"value {slp_eval(s)}\nlength {len(s)}\n")


# -- parser ------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, io=True):
    if io:
        p.add_argument("--in", dest="input", required=True, help="input file ('-' for stdin)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")


def _caps_args(p):
    p.add_argument("--max-terms", type=int, default=TERM_CAP, help=f"expansion term cap (default {TERM_CAP})")
    p.add_argument("--degree-cap", type=int, default=DEGREE_CAP, help=f"expansion degree cap (default {DEGREE_CAP})")


def _field_args(p):
    p.add_argument("--p", type=int, default=2, help="characteristic (default 2)")
    p.add_argument("--ext", type=int, default=1, help="extension degree (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="charp",
        description="Circuits, branching programs and polynomials over finite fields.",
        epilog=GRAMMARS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", help="parse a device and report its metrics")
    _common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("expand", help="expand a device into a sparse polynomial")
    _common(p)
    _caps_args(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("transform", help="device-to-device passes")
    p.add_argument("op", choices=["pth-root", "modp-decompose", "kronecker-sub", "simulate-ext"])
    _common(p)
    p.add_argument("--verify-oracle", action="store_true", help="cross-check against polynomial expansion")
    p.add_argument("--no-prune", action="store_true", help="keep unreachable gates")
    p.add_argument("--blowup-bits", type=int, default=BLOWUP_BITS, help=f"cap p^n <= 2^bits (default {BLOWUP_BITS})")
    p.add_argument("--base", type=int, help="kronecker base b")
    p.add_argument("--digits", type=int, help="kronecker digits per variable")
    p.add_argument("--k", type=int, help="simulate-ext: number of coordinates (default the full degree)")
    p.set_defaults(func=cmd_transform)

    for name, fn, hlp in (("encode", cmd_encode, "Kronecker-encode a polynomial"), ("decode", cmd_decode, "invert the encoding")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--base", type=int, required=True)
        p.add_argument("--digits", type=int)
        p.add_argument("--nvars", type=int, help="decode: number of original variables")
        p.set_defaults(func=fn)

    p = sub.add_parser("design", help="build a verified combinatorial design")
    p.add_argument("kind", choices=["rs", "greedy"])
    _common(p, io=False)
    for flag in ("n", "m", "c", "r", "ell"):
        p.add_argument(f"--{flag}", type=int)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("gen", help="hitting-set generators")
    p.add_argument("kind", choices=["ki", "bootstrap", "eval"])
    p.add_argument("--in", dest="input", help="generator file (eval)")
    _common(p, io=False)
    _field_args(p)
    p.add_argument("--poly", help="ki: hard polynomial file")
    p.add_argument("--design", help="ki: design file")
    p.add_argument("--n", type=int, help="ki: number of outputs")
    p.add_argument("--k", type=int, default=2, help="bootstrap: family arity (default 2)")
    p.add_argument("--s", type=int, default=2, help="bootstrap: size parameter (default 2)")
    p.add_argument("--family", choices=["power-sum", "monomial"], default="power-sum")
    p.add_argument("--at", help="eval: seed point, bracketed elements or integer codes")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("hitting-set", help="evaluate a generator on a grid")
    p.add_argument("action", choices=["build"])
    _common(p, io=False)
    _field_args(p)
    p.add_argument("--gen", help="generator file")
    p.add_argument("--cube", action="store_true", help="plain grid S^n instead of a generator")
    p.add_argument("--n", type=int, help="cube arity")
    p.add_argument("--degree", type=int, required=True, help="degree of the tested class")
    p.add_argument("--dedup", action="store_true", help="drop repeated points")
    p.set_defaults(func=cmd_hitting_set)

    p = sub.add_parser("pit", help="polynomial identity tests")
    p.add_argument("method", choices=["random", "hitting-set", "brute"])
    _common(p)
    _caps_args(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--set-size", type=int, help="sample set size (default 2D+1)")
    p.add_argument("--hs", help="hitting-set file")
    p.set_defaults(func=cmd_pit)

    p = sub.add_parser("slp", help="integer straight-line programs")
    p.add_argument("kind", choices=["pow2", "factorial", "pow2-factorial", "window"])
    p.add_argument("--n", type=int, required=True)
    _common(p, io=False)
    p.set_defaults(func=cmd_slp)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ResourceError as exc:
        print(f"{exc.prefix}: {exc}", file=sys.stderr)
        return 2
    except CharpError as exc:
        print(f"{exc.prefix}: {exc}", file=sys.stderr)
        return 1
    return 0


def run(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
