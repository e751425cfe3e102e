"""Algebraic circuits over finite fields of positive characteristic.

Modules: ``ff`` (field arithmetic), ``ir`` (circuits, formulae, branching
programs), ``poly`` (sparse polynomials and expansion), ``transform``
(mod-p decomposition, pth roots, Kronecker substitution, extension
simulation), ``designs``, ``gen`` (generators and hitting sets), ``pit``,
``intslp`` (integer straight-line programs) and ``cli``.
"""

from .errors import (
    CharpError,
    DomainError,
    IntegrityError,
    ParseError,
    ResourceError,
    UsageError,
)
from .ff import FieldElement, FieldSpec, get_field, smallest_extension
from .ir import (
    Abp,
    AbpEdge,
    Circuit,
    CircuitBuilder,
    Formula,
    build_power,
    evaluate,
    evaluate_codes,
    metrics,
    parse,
    serialize,
)
from .poly import SparsePoly, expand, kronecker_decode, kronecker_encode, poly_mod_p_decompose
from .transform import (
    mod_p_decompose_abp,
    mod_p_decompose_circuit,
    mod_p_decompose_formula,
    pth_root_abp,
    pth_root_circuit,
    pth_root_formula,
    simulate_extension,
)
from .designs import Design, greedy_design, rs_design
from .gen import Generator, HittingSet, bootstrap_generator, hitting_set_from_generator, hybrid_index, ki_generator
from .pit import PitVerdict, pit_bruteforce, pit_hitting_set, pit_random
from .intslp import IntSlp, binomial_window_poly, pow2_factorial_slp, shamir_factorial_slp, slp_eval, slp_pow2

__version__ = "0.1.0"
