import subprocess

import pytest

from bslsat import backend
from bslsat.backend import (
    Encoding, SolverVerdict, check_script, decode_model, default_args, model_requests, render,
    resolve_dialect, run_solver,
)
from bslsat.config import Config
from bslsat.errors import MalformedModel, SolverCrash, SolverTimeout
from bslsat.formula import NIL, Field, Nls, Sls, Sort, Star
from bslsat.reconstruction import extend_countermodel, inverse_translate, verify_model
from bslsat.semantics import LOC_NIL, Location, evaluate
from bslsat.sexpr import read_sexprs
from bslsat.translator import translate_formula

S1 = Location(Sort.SLS, 1)

# get-value answers for the script of x |-> nil: [nil, S1] with x at S1
POINTER_VALUES = (
    ["#b00", "(_ bv1 2)"]
    + ["#b00"] * 6
    + ["false", "true", "true", "true", "true", "false", "true", "false"]
)


def solver_output(status, values=()):
    text = status + "\n"
    if values:
        text += "(" + " ".join(f"(t{i} {v})" for i, v in enumerate(values)) + ")\n"
    return text


@pytest.fixture
def pointer_script(svars, pto):
    return translate_formula(pto(svars["x"]))


@pytest.fixture
def fake_solver(monkeypatch):
    """Replace the solver process by canned output."""
    calls = []

    def install(stdout, stderr="", returncode=0):
        def call(text, command, args, timeout):
            calls.append((text, command, args))
            return subprocess.CompletedProcess([command], returncode, stdout=stdout, stderr=stderr)
        monkeypatch.setattr(backend, "_call_process", call)
        return calls
    return install


class TestRender:
    def test_bitvector_script(self, pointer_script):
        text = render(pointer_script)
        assert "(set-logic QF_ABV)" in text
        assert "(declare-const x (_ BitVec 2))" in text
        assert "(assert (bvult x (_ bv2 2)))" in text
        assert text.rstrip().endswith("(exit)")
        assert "(get-value (" in text

    def test_z3_sets(self, pointer_script):
        text = render(pointer_script, Encoding.SETS, "z3")
        assert "(set-logic ALL)" in text
        assert "(declare-datatypes ((Loc 0)) (((loc_nil) (loc_S1))))" in text
        assert "(store ((as const (Array Loc Bool)) false) x true)" in text

    def test_cvc5_sets(self, pointer_script):
        text = render(pointer_script, Encoding.SETS, "cvc5", with_model=False)
        assert "(declare-const D (Set Loc))" in text
        assert "(set.singleton x)" in text
        assert "get-value" not in text

    def test_quantified_logic(self, svars, pto):
        script = translate_formula(pto(svars["x"]), strategy="quantif")
        assert "(set-logic QF_ABV)" in render(script)
        script = translate_formula(Star(pto(svars["x"]), pto(svars["y"])), strategy="quantif")
        assert "(set-logic ABV)" in render(script)

    @pytest.mark.parametrize("dialect", ["z3", "cvc5"])
    def test_sets_unfold_location_quantifiers(self, nvars, svars, dialect):
        script = translate_formula(Nls(nvars["x"], NIL, svars["z"]), path_quantifier_ratio=0.0)
        assert script.stats["location_quantifiers"] == 2
        text = render(script, Encoding.SETS, dialect)
        assert "forall" not in text
        assert "(l_0 Loc)" not in text
        assert "(select h_n loc_N1)" in text
        assert "forall" in render(script)

    def test_sets_keep_set_binders(self, svars, pto):
        script = translate_formula(Star(pto(svars["x"]), pto(svars["y"])), strategy="quantif")
        text = render(script, Encoding.SETS, "z3")
        assert "(exists ((F_0_l (Array Loc Bool)) (F_0_r (Array Loc Bool)))" in text

    def test_solver_defaults(self):
        assert default_args("/usr/bin/z3") == ["-in", "-smt2"]
        assert default_args("mysolver") == []
        assert resolve_dialect("/opt/cvc5") == "cvc5"
        assert resolve_dialect("z3", "cvc5") == "cvc5"
        assert resolve_dialect(None) == "z3"


class TestRunSolver:
    def test_sat_with_values(self, fake_solver, pointer_script):
        calls = fake_solver(solver_output("sat", POINTER_VALUES))
        verdict = run_solver(render(pointer_script), Config(solver_command="z3"))
        assert verdict.status == "sat"
        assert len(verdict.raw) == len(model_requests(pointer_script))
        assert calls[0][2] == ["-in", "-smt2"]

    def test_explicit_arguments(self, fake_solver):
        calls = fake_solver("unsat\n")
        verdict = run_solver("(check-sat)", Config(solver_command="z3", solver_args=["-T:5"]))
        assert verdict.status == "unsat"
        assert verdict.raw == []
        assert calls[0][2] == ["-T:5"]

    def test_timeout_is_unknown(self, monkeypatch):
        def call(text, command, args, timeout):
            raise SolverTimeout("too slow")
        monkeypatch.setattr(backend, "_call_process", call)
        verdict = run_solver("(check-sat)", Config(solver_command="z3"))
        assert (verdict.status, verdict.reason) == ("unknown", "timeout")

    def test_missing_verdict(self, fake_solver):
        fake_solver("(error \"boom\")\n", stderr="boom", returncode=1)
        with pytest.raises(SolverCrash) as info:
            run_solver("(check-sat)", Config(solver_command="z3"))
        assert info.value.returncode == 1

    def test_no_solver_configured(self):
        with pytest.raises(SolverCrash, match="no SMT solver"):
            run_solver("(check-sat)", Config(solver_command=None))


class TestDecode:
    def test_symbol_map(self, pointer_script):
        values = read_sexprs(solver_output("sat", POINTER_VALUES))[1]
        verdict = SolverVerdict("sat", raw=[(pair[0], pair[1]) for pair in values.items])
        model = decode_model(verdict, pointer_script)
        assert model["x"] == S1
        assert model["nil"] == LOC_NIL
        assert model["D"] == {S1}
        assert model["h_n"][S1] == LOC_NIL
        assert verdict.model is model

    def test_wrong_value_count(self, pointer_script):
        with pytest.raises(MalformedModel, match="model values"):
            decode_model(SolverVerdict("sat", raw=[]), pointer_script)

    def test_check_script_round(self, fake_solver, pointer_script, tmp_path, svars, pto):
        fake_solver(solver_output("sat", POINTER_VALUES))
        dump = tmp_path / "out" / "query.smt2"
        verdict = check_script(pointer_script, Config(solver_command="z3"), dump_to=str(dump))
        assert dump.read_text().startswith("(set-option :produce-models true)")
        m = inverse_translate(verdict, pto(svars["x"]))
        assert m.heap == {S1: {Field.N: LOC_NIL}}
        assert verify_model(m, pto(svars["x"]))


class TestReconstruction:
    def symbols(self, **extra):
        model = {"nil": LOC_NIL, "x": S1, "h_n": {S1: LOC_NIL}, "h_p": {}, "h_t": {},
                 "D": frozenset([S1]), "D_S": frozenset([LOC_NIL, S1]),
                 "D_D": frozenset([LOC_NIL]), "D_N": frozenset([LOC_NIL])}
        model.update(extra)
        return model

    def test_missing_variable(self, svars, pto):
        with pytest.raises(MalformedModel, match="no value"):
            inverse_translate(self.symbols(), pto(svars["y"]))

    def test_location_in_two_sorts(self, svars, pto):
        with pytest.raises(MalformedModel, match="sort sets"):
            inverse_translate(self.symbols(D_D=frozenset([LOC_NIL, S1])), pto(svars["x"]))

    def test_verdict_without_model(self, svars, pto):
        with pytest.raises(MalformedModel):
            inverse_translate(SolverVerdict("sat"), pto(svars["x"]))

    def test_extend_countermodel(self, svars, pto):
        x, z = svars["x"], svars["z"]
        lhs, rhs = pto(x), Star(pto(x), Sls(z, NIL))
        m = extend_countermodel(inverse_translate(self.symbols(), lhs), lhs, rhs)
        assert m.stack[z] == Location(Sort.SLS, 2)
        assert evaluate(m, lhs)
        assert not evaluate(m, rhs)
