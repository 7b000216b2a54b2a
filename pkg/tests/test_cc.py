import random

import pytest
from hypothesis import given, strategies as st

from chorc import cc
from chorc.cc import (BinOp, Call, ChorProgram, Com, Cond, End, Interaction,
                      Label, Lit, Not, Opaque, Sel, VBool, VInt, VStr, Var)

from conftest import auth_program
import gen


# ---------------------------------------------------------------------------
# Expression evaluation


def test_eval_literal_identity():
    assert cc.eval_expr(Lit(VInt(0)), {}) == VInt(0)


def test_eval_addition():
    assert cc.eval_expr(BinOp("+", Lit(VInt(1)), Lit(VInt(2))), {}) == VInt(3)


def test_eval_var_lookup():
    assert cc.eval_expr(Var("token"), {"token": VStr("abc")}) == VStr("abc")


def test_eval_unbound_variable():
    with pytest.raises(cc.UnboundVariable) as exc:
        cc.eval_expr(Var("missing"), {})
    assert exc.value.name == "missing"


def test_eval_type_mismatch():
    with pytest.raises(cc.TypeMismatch):
        cc.eval_expr(BinOp("+", Lit(VStr("a")), Lit(VInt(1))), {})
    with pytest.raises(cc.TypeMismatch):
        cc.eval_expr(BinOp("and", Lit(VInt(1)), Lit(VBool(True))), {})
    with pytest.raises(cc.TypeMismatch):
        cc.eval_expr(Not(Lit(VInt(1))), {})
    with pytest.raises(cc.TypeMismatch):
        cc.eval_expr(BinOp("<", Lit(VStr("a")), Lit(VStr("b"))), {})


def test_eval_opaque_raises():
    with pytest.raises(cc.OpaqueNotEvaluable):
        cc.eval_expr(Opaque("anything"), {})


def test_eval_string_concat():
    e = BinOp("++", Lit(VStr("he")), Lit(VStr("llo")))
    assert cc.eval_expr(e, {}) == VStr("hello")


def test_eval_comparisons_and_logic():
    assert cc.eval_expr(BinOp("<", Lit(VInt(1)), Lit(VInt(2))), {}) == VBool(True)
    assert cc.eval_expr(BinOp("==", Lit(VInt(3)), Lit(VInt(3))), {}) == VBool(True)
    assert cc.eval_expr(BinOp("or", Lit(VBool(False)), Lit(VBool(True))), {}) == VBool(True)
    assert cc.eval_expr(Not(Lit(VBool(False))), {}) == VBool(True)


def test_eval_equality_is_structural_across_tags():
    assert cc.eval_expr(BinOp("==", Lit(VInt(1)), Lit(VBool(True))), {}) == VBool(False)
    assert cc.eval_expr(BinOp("==", Lit(VInt(1)), Lit(VStr("1"))), {}) == VBool(False)


def test_values_do_not_coerce():
    assert VInt(1) != VBool(True)
    assert VInt(0) != VBool(False)
    assert VStr("1") != VInt(1)


def test_eval_guard_requires_bool():
    assert cc.eval_guard(BinOp("<", Lit(VInt(0)), Lit(VInt(1))), {}) is True
    with pytest.raises(cc.TypeMismatch):
        cc.eval_guard(Lit(VInt(1)), {})


# ---------------------------------------------------------------------------
# Validation


def test_validate_self_communication():
    main = Interaction(Com("p", Lit(VInt(1)), "p", "x"), None, End())
    errors = cc.validate_program(ChorProgram((), main))
    assert [e.kind for e in errors] == ["self_communication"]
    assert errors[0].owner is None and errors[0].path == ()


def test_validate_self_selection():
    main = Interaction(Sel("p", "p", Label.LEFT), None, End())
    errors = cc.validate_program(ChorProgram((), main))
    assert [e.kind for e in errors] == ["self_communication"]


def test_validate_auth_program_clean():
    assert cc.validate_program(auth_program()) == []


def test_validate_unbound_procedure():
    errors = cc.validate_program(ChorProgram((), Call("X")))
    assert [e.kind for e in errors] == ["unbound_procedure"]
    assert "X" in errors[0].detail


def test_validate_duplicate_definition():
    p = ChorProgram((("X", End()), ("X", End())), End())
    kinds = [e.kind for e in cc.validate_program(p)]
    assert "duplicate_definition" in kinds


def test_validate_bad_identifier():
    main = Interaction(Com("9p", Lit(VInt(1)), "q", "x"), None, End())
    kinds = [e.kind for e in cc.validate_program(ChorProgram((), main))]
    assert "bad_identifier" in kinds


def test_validate_empty_annotation():
    main = Interaction(Com("p", Lit(VInt(1)), "q", "x"), "", End())
    kinds = [e.kind for e in cc.validate_program(ChorProgram((), main))]
    assert kinds == ["empty_annotation"]


def test_validate_unknown_operator():
    main = Interaction(Com("p", BinOp("%", Lit(VInt(1)), Lit(VInt(2))), "q", "x"),
                       None, End())
    kinds = [e.kind for e in cc.validate_program(ChorProgram((), main))]
    assert kinds == ["unknown_operator"]


def test_validate_error_paths_point_into_branches():
    bad = Interaction(Com("p", Lit(VInt(1)), "p", "x"), None, End())
    main = Cond("d", Lit(VBool(True)), End(), bad)
    errors = cc.validate_program(ChorProgram((), main))
    assert errors[0].path == (1,)


# ---------------------------------------------------------------------------
# Process sets


def _syntactic_pids(c, defs=None):
    # Independent structural-recursion oracle, calls ignored.
    match c:
        case End() | Call(_):
            return set()
        case Interaction(eta, _, cont):
            return set(cc.eta_pids(eta)) | _syntactic_pids(cont)
        case Cond(d, _, t, e):
            return {d} | _syntactic_pids(t) | _syntactic_pids(e)


def unfold_oracle(c, defs, depth: int):
    """Expected process set by substituting calls `depth` times and then
    collecting pids syntactically (leftover calls contribute nothing)."""

    def substitute(term, remaining):
        match term:
            case End():
                return term
            case Interaction(eta, ann, cont):
                return Interaction(eta, ann, substitute(cont, remaining))
            case Cond(d, g, t, e):
                return Cond(d, g, substitute(t, remaining), substitute(e, remaining))
            case Call(name):
                if remaining == 0:
                    return term
                return substitute(defs[name], remaining - 1)

    return _syntactic_pids(substitute(c, depth))


def test_process_set_end_is_empty():
    assert cc.process_set(End(), {}) == set()


def test_process_set_auth_main():
    program = auth_program()
    assert cc.process_set(program.main, program.defs_map()) == {"Ip", "Server", "Client"}


def test_process_set_through_call():
    defs = {"X": Interaction(Com("p", Lit(VInt(1)), "q", "x"), None, End())}
    assert cc.process_set(Call("X"), defs) == {"p", "q"}
    assert cc.process_set(Call("X"), defs) == unfold_oracle(Call("X"), defs, 8)


def test_process_list_first_occurrence_order():
    program = auth_program()
    assert cc.process_list(program.main, {}) == ["Client", "Ip", "Server"]


def test_process_set_recursive_defs_terminate():
    defs = {"X": Call("Y"), "Y": Interaction(Com("a", Lit(VInt(1)), "b", "x"),
                                             None, Call("X"))}
    assert cc.process_set(Call("X"), defs) == {"a", "b"}


@given(st.integers(0, 10 ** 9))
def test_validate_is_idempotent_and_pure(seed):
    program = gen.gen_chor_program(random.Random(seed))
    first = cc.validate_program(program)
    second = cc.validate_program(program)
    assert first == second


@given(st.integers(0, 10 ** 9))
def test_process_set_contains_syntactic_pids(seed):
    program = gen.gen_chor_program(random.Random(seed))
    defs = program.defs_map()
    assert cc.process_set(program.main, defs) >= _syntactic_pids(program.main)


@given(st.integers(0, 10 ** 9))
def test_process_set_callfree_equals_syntactic(seed):
    c = gen.gen_choreography(random.Random(seed), depth=4, procs=())
    assert cc.process_set(c, {}) == _syntactic_pids(c)


@given(st.integers(0, 10 ** 9))
def test_process_set_monotone_in_defs(seed):
    rng = random.Random(seed)
    program = gen.gen_chor_program(rng)
    defs = program.defs_map()
    before = cc.process_set(program.main, defs)
    extra = dict(defs)
    extra["ZZextra"] = Interaction(Com("newpid", Lit(VInt(1)), "other", "x"),
                                   None, End())
    assert cc.process_set(program.main, extra) >= before
