import json

import pytest

from charp.cli import main
from charp.designs import Design
from charp.gen import Generator, HittingSet
from charp.intslp import IntSlp, slp_eval
from charp.ir import CircuitBuilder, build_power, parse, serialize
from charp.ff import get_field
from charp.poly import SparsePoly, expand

F3 = get_field(3)


@pytest.fixture
def files(tmp_path):
    b = CircuitBuilder(F3, 2)
    base = b.build([b.add(b.input(0), b.input(1), 1, 2)])
    (tmp_path / "base.circ").write_text(serialize(base))
    (tmp_path / "sq.circ").write_text(serialize(build_power(base, 3)))
    F2 = get_field(2)
    b = CircuitBuilder(F2, 1)
    (tmp_path / "zero.circ").write_text(serialize(b.build([b.const(0)])))
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_pth_root_round_trip(files, capsys):
    code, _, err = run(
        ["transform", "pth-root", "--in", files / "sq.circ", "--out", files / "root.circ", "--verify-oracle"],
        capsys,
    )
    assert code == 0, err
    text = (files / "root.circ").read_text()
    assert text.startswith("# transform pth-root")
    assert expand(parse(text)) == expand(parse((files / "base.circ").read_text()))


def test_design_rs(files, capsys):
    code, _, _ = run(["design", "rs", "--n", 9, "--m", 3, "--c", 2, "--r", 2, "--out", files / "d.design"], capsys)
    assert code == 0
    d = Design.from_text((files / "d.design").read_text())
    assert len(d.sets) == 9


def test_pit_brute_json(files, capsys):
    code, out, _ = run(["pit", "brute", "--in", files / "zero.circ", "--json"], capsys)
    assert code == 0
    assert out.count("\n") == 1
    assert json.loads(out)["is_zero"] is True


def test_pit_random_and_hitting_set(files, capsys):
    code, out, _ = run(["pit", "random", "--in", files / "base.circ", "--json", "--seed", 3], capsys)
    assert code == 0 and json.loads(out)["is_zero"] is False
    code, _, _ = run(
        ["hitting-set", "build", "--cube", "--p", 3, "--n", 2, "--degree", 1, "--out", files / "h.hs"], capsys
    )
    assert code == 0
    assert len(HittingSet.from_text((files / "h.hs").read_text()).points) == 4
    code, out, _ = run(["pit", "hitting-set", "--in", files / "base.circ", "--hs", files / "h.hs"], capsys)
    assert code == 0 and "is_zero false" in out


def test_validate_and_expand(files, capsys):
    code, out, _ = run(["validate", "--in", files / "sq.circ", "--json"], capsys)
    info = json.loads(out)
    assert code == 0 and info["degree_bound"] == 3 and info["kind"] == "circuit"
    code, out, _ = run(["expand", "--in", files / "base.circ"], capsys)
    assert SparsePoly.from_text(out) == SparsePoly(F3, 2, {(1, 0): 1, (0, 1): 2})


def test_modp_decompose_and_kronecker(files, capsys):
    code, out, _ = run(["transform", "modp-decompose", "--in", files / "sq.circ", "--verify-oracle"], capsys)
    assert code == 0 and len(parse(out).outputs) == 9
    code, out, _ = run(
        ["transform", "kronecker-sub", "--in", files / "base.circ", "--base", 2, "--digits", 2, "--verify-oracle"],
        capsys,
    )
    assert code == 0 and parse(out).nvars == 1


def test_simulate_ext(tmp_path, capsys):
    F4 = get_field(2, 2)
    b = CircuitBuilder(F4, 1)
    (tmp_path / "w.circ").write_text(serialize(b.build([b.mul(b.input(0), b.const(2))])))
    code, out, _ = run(["transform", "simulate-ext", "--in", tmp_path / "w.circ", "--verify-oracle"], capsys)
    assert code == 0 and len(parse(out).outputs) == 2


def test_encode_decode(tmp_path, capsys):
    g = SparsePoly(F3, 1, {(5,): 1, (0,): 2})
    (tmp_path / "g.poly").write_text(g.to_text())
    code, out, _ = run(["encode", "--in", tmp_path / "g.poly", "--base", 2, "--out", tmp_path / "f.poly"], capsys)
    assert code == 0
    f = SparsePoly.from_text((tmp_path / "f.poly").read_text())
    code, out, _ = run(
        ["decode", "--in", tmp_path / "f.poly", "--base", 2, "--digits", f.nvars, "--nvars", 1], capsys
    )
    assert SparsePoly.from_text(out) == g


def test_gen_commands(tmp_path, capsys):
    code, _, _ = run(["gen", "bootstrap", "--k", 2, "--s", 2, "--out", tmp_path / "g.gen"], capsys)
    assert code == 0
    G = Generator.from_text((tmp_path / "g.gen").read_text())
    assert G.seed_len == 16 and G.nvars_out == 32
    code, out, _ = run(["gen", "eval", "--in", tmp_path / "g.gen", "--at", " ".join(["1"] * 16)], capsys)
    assert code == 0 and len(out.split("]")) == 33
    F2 = get_field(2)
    (tmp_path / "h.poly").write_text(SparsePoly(F2, 2, {(1, 1): 1}).to_text())
    code, _, _ = run(["design", "rs", "--n", 4, "--m", 2, "--c", 2, "--r", 2, "--out", tmp_path / "d.design"], capsys)
    assert code == 0
    code, _, err = run(
        ["gen", "ki", "--poly", tmp_path / "h.poly", "--design", tmp_path / "d.design", "--out", tmp_path / "k.gen"],
        capsys,
    )
    assert code == 0, err
    code, _, _ = run(
        ["hitting-set", "build", "--gen", tmp_path / "k.gen", "--degree", 1, "--dedup", "--out", tmp_path / "k.hs"],
        capsys,
    )
    assert code == 0
    H = HittingSet.from_text((tmp_path / "k.hs").read_text())
    # degree 2 times D = 1 needs a 3-point grid, so F_2 is lifted to F_4
    assert H.field == get_field(2, 2) and 0 < len(H.points) <= 3**4
    code, _, err = run(["design", "greedy", "--n", 4, "--m", 2], capsys)
    assert code == 1 and "2^m" in err


@pytest.mark.parametrize(
    "kind,n,value",
    [("pow2", 10, 1024), ("factorial", 10, 3628800), ("pow2-factorial", 3, 40320)],
)
def test_slp(kind, n, value, tmp_path, capsys):
    code, out, _ = run(["slp", kind, "--n", n, "--out", tmp_path / "s.slp"], capsys)
    assert code == 0 and f"value {value}" in out
    assert slp_eval(IntSlp.from_text((tmp_path / "s.slp").read_text())) == value


def test_slp_window_reports_mismatch(capsys):
    code, out, _ = run(["slp", "window", "--n", 2], capsys)
    assert code == 0 and "(mismatch)" in out and "fails" in out
    code, out, _ = run(["slp", "window", "--n", 3], capsys)
    assert "holds" in out and "mismatch" not in out


# -- errors -------------------------------------------------------------------------------


def test_exit_codes(files, capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 1 and err.startswith("usage error")
    code, _, err = run(["validate", "--in", files / "missing.circ"], capsys)
    assert code == 1 and "cannot read" in err
    (files / "bad.circ").write_text("field p 2 ext 1 modulus [0 1]\nnvars 1\ngate 0 add 1 [1] 0 [1]\n")
    code, _, err = run(["validate", "--in", files / "bad.circ"], capsys)
    assert code == 1 and err.startswith("parse error: line 3")
    code, _, err = run(["transform", "pth-root", "--in", files / "sq.circ", "--blowup-bits", 2], capsys)
    assert code == 2 and err.startswith("resource error")
    code, _, err = run(["transform", "pth-root", "--in", files / "base.circ", "--verify-oracle"], capsys)
    assert code == 1 and err.startswith("domain error")
    code, _, err = run(["expand", "--in", files / "sq.circ", "--max-terms", 0], capsys)
    assert code == 1
    code, _, err = run(["design", "rs", "--n", 9, "--m", 6, "--c", 2, "--r", 2], capsys)
    assert code == 1 and "prime power" in err


def test_help_documents_grammars(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0
    for word in ("gate <k>", "design ell", "generator seed", "hitting-set n", "step <k>"):
        assert word in out
