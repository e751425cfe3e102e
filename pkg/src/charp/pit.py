"""Polynomial identity tests: random sampling, hitting-set scan, and exact expansion."""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from itertools import product as cartesian

from .errors import IntegrityError, UsageError
from .ff import FieldSpec, smallest_extension
from .ir import Circuit, evaluate_codes, lift, metrics
from .poly import DEGREE_CAP, TERM_CAP, SparsePoly, expand


@dataclass
class PitVerdict:
    is_zero: bool
    method: str  # random | hitting_set | brute_force
    witness: tuple | None  # element codes in ``field``
    field: FieldSpec
    evaluations: int
    error_bound: float | None = None

    def to_json(self) -> str:
        wit = None
        if self.witness is not None:
            wit = [list(self.field._digits(c)) for c in self.witness]
        return json.dumps(
            {
                "is_zero": self.is_zero,
                "method": self.method,
                "witness": wit,
                "error_bound": self.error_bound,
                "field": self.field.header(),
                "evaluations": self.evaluations,
            },
            separators=(",", ":"),
        )


def _lift_to(c: Circuit, size: int) -> Circuit:
    big = smallest_extension(c.field, size)
    return lift(c, big)


def _check_witness(c: Circuit, point) -> None:
    if not evaluate_codes(c, point)[0]:
        raise IntegrityError("reported witness evaluates to zero")


def pit_random(c: Circuit, trials: int = 20, set_size: int | None = None, rng_seed=0) -> PitVerdict:
    """Schwartz-Zippel: evaluate at points drawn uniformly from S^n.

    S is the first ``set_size`` field elements in canonical order (an extension
    field when needed); the default is twice the degree bound plus one.
    """
    D = metrics(c).degree_bound
    if set_size is None:
        set_size = 2 * D + 1
    if set_size <= 0:
        raise UsageError("set_size must be positive")
    if trials < 0:
        raise UsageError("trials must be non-negative")
    c = _lift_to(c, set_size)
    S = c.field.canonical_elements(set_size)
    rng = random.Random(rng_seed)
    for t in range(trials):
        point = [rng.choice(S) for _ in range(c.nvars)]
        if evaluate_codes(c, point)[0]:
            _check_witness(c, point)
            return PitVerdict(False, "random", tuple(point), c.field, t + 1)
    bound = min(1.0, D / set_size) ** trials if trials else 1.0
    return PitVerdict(True, "random", None, c.field, trials, bound)


def pit_hitting_set(c: Circuit, H) -> PitVerdict:
    """Evaluate at every point of H in order; the first nonzero value is the witness."""
    if H.n != c.nvars:
        raise UsageError(f"hitting set has arity {H.n}, circuit has {c.nvars} variables")
    if H.field != c.field:
        c = lift(c, H.field)
    class_degree = getattr(H, "class_degree", None)
    if class_degree is not None and metrics(c).degree_bound > class_degree:
        warnings.warn(
            f"circuit degree bound {metrics(c).degree_bound} exceeds the class degree "
            f"{class_degree} the hitting set was built for",
            stacklevel=2,
        )
    used = 0
    for pt in H:
        used += 1
        if evaluate_codes(c, pt)[0]:
            return PitVerdict(False, "hitting_set", tuple(pt), c.field, used)
    return PitVerdict(True, "hitting_set", None, c.field, used)


def find_witness(f: SparsePoly) -> tuple[FieldSpec, tuple]:
    """A nonzero point of f on a grid of deg(f)+1 canonical elements (extension if needed)."""
    F = f.field
    size = f.degree() + 1
    big = smallest_extension(F, size)
    if big != F:
        emb = F.embedding(big)
        f = SparsePoly._raw(big, f.nvars, {e: emb[c] for e, c in f.terms.items()})
    grid = big.canonical_elements(size)
    for pt in cartesian(grid, repeat=f.nvars):
        if f.eval_codes(pt):
            return big, pt
    raise IntegrityError("no witness on a grid larger than the degree")


def pit_bruteforce(
    c: Circuit, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP
) -> PitVerdict:
    """Expand exactly; for a nonzero polynomial also exhibit a witness."""
    f = expand(c, degree_cap, term_cap)
    if not f:
        return PitVerdict(True, "brute_force", None, c.field, 0)
    big, pt = find_witness(f)
    _check_witness(lift(c, big), pt)
    return PitVerdict(False, "brute_force", pt, big, 1)
