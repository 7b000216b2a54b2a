import random

import pytest
from hypothesis import given, strategies as st

from chorc import cc, epp, sp
from chorc.cc import (Call, ChorProgram, Com, Cond, End, Interaction, Label,
                      Lit, Sel, VBool, VInt)

from conftest import auth_program
from test_sp import auth_client_term
import gen


# ---------------------------------------------------------------------------
# Projection of the authentication example


def test_project_auth_onto_client_matches_reference_term():
    program = auth_program()
    b = epp.project_behaviour(program.main, "Client", program.defs_map())
    assert sp.behaviour_equal(b, auth_client_term())


def test_epp_auth_program():
    proc = epp.epp(auth_program())
    assert proc.defs == {}
    assert [pid for pid, _ in proc.network] == ["Client", "Ip", "Server"]
    assert sp.behaviour_equal(proc.behaviour_of("Client"), auth_client_term())


def test_epp_auth_server_and_ip_shapes():
    proc = epp.epp(auth_program())
    server = proc.behaviour_of("Server")
    assert isinstance(server, sp.Offer)
    assert server.left.ann == "authOk" and server.right.ann == "authFail"
    assert isinstance(server.left.body, sp.Send)
    ip = proc.behaviour_of("Ip")
    assert isinstance(ip, sp.Recv)
    assert isinstance(ip.cont, sp.Cond)


def test_project_end_onto_anything():
    assert epp.project_behaviour(End(), "whoever", {}) == sp.End()


def test_projection_erases_nonparticipants():
    program = auth_program()
    b = epp.project_behaviour(program.main, "Outsider", program.defs_map())
    assert b == sp.End()


def test_unprojectable_send_vs_end():
    # Cond(ip, b, Com(s,e,c,x); End, End): s sees Send vs End.
    main = Cond("ip", Lit(VBool(True)),
                Interaction(Com("s", Lit(VInt(1)), "c", "x"), None, End()),
                End())
    with pytest.raises(epp.ProjectionError) as exc:
        epp.epp(ChorProgram((), main))
    err = exc.value
    assert err.kind == "merge_conflict"
    assert err.pid == "s"  # first non-decider in network order
    assert err.path == () and err.owner is None


def test_empty_program_projects_to_empty_network():
    proc = epp.epp(ChorProgram((), End()))
    assert proc.network == () and proc.defs == {}


def test_call_projects_to_end_for_nonparticipants():
    defs = (("X", Interaction(Com("p", Lit(VInt(1)), "q", "x"), None, End())),)
    main = Interaction(Com("r", Lit(VInt(0)), "p", "seed"), None, Call("X"))
    proc = epp.epp(ChorProgram(defs, main))
    assert proc.behaviour_of("r") == sp.Send("p", Lit(VInt(0)), None, sp.End())
    assert ("X", "r") not in proc.defs
    assert ("X", "p") in proc.defs and ("X", "q") in proc.defs


def test_unreachable_defs_are_not_projected():
    defs = (("Dead", Interaction(Com("a", Lit(VInt(1)), "b", "x"), None, End())),)
    main = Interaction(Com("p", Lit(VInt(1)), "q", "x"), None, End())
    proc = epp.epp(ChorProgram(defs, main))
    assert proc.defs == {}
    assert sp.validate_proc_program(proc) == []


# ---------------------------------------------------------------------------
# The merge operator


def test_merge_disjoint_offer_branches_union():
    a = sp.Offer("p", sp.OfferBranch("a", sp.End()), None)
    b = sp.Offer("p", None, sp.OfferBranch("b", sp.End()))
    merged = epp.merge(a, b)
    assert merged == sp.Offer("p", sp.OfferBranch("a", sp.End()),
                              sp.OfferBranch("b", sp.End()))


def test_merge_of_auth_conditional_branches_is_reference_offer():
    program = auth_program()
    cond = program.main.cont
    defs = program.defs_map()
    left = epp.project_behaviour(cond.then_branch, "Client", defs)
    right = epp.project_behaviour(cond.else_branch, "Client", defs)
    assert epp.merge(left, right) == auth_client_term().cont


def test_merge_annotation_conflict():
    a = sp.Offer("p", sp.OfferBranch("x", sp.End()), None)
    b = sp.Offer("p", sp.OfferBranch("y", sp.End()), None)
    with pytest.raises(epp.MergeError) as exc:
        epp.merge(a, b)
    assert exc.value.kind == "annotation_conflict"


def test_merge_same_annotation_both_present():
    a = sp.Offer("p", sp.OfferBranch("x", sp.End()), None)
    b = sp.Offer("p", sp.OfferBranch("x", sp.End()), None)
    assert epp.merge(a, b) == a


def test_merge_conflict_names_both_heads():
    with pytest.raises(epp.MergeError) as exc:
        epp.merge(sp.Send("q", Lit(VInt(1)), None, sp.End()), sp.End())
    assert exc.value.kind == "merge_conflict"
    assert "send" in str(exc.value) and "end" in str(exc.value)


def test_merge_same_constructor_different_data_conflicts():
    a = sp.Send("q", Lit(VInt(1)), None, sp.End())
    b = sp.Send("q", Lit(VInt(2)), None, sp.End())
    with pytest.raises(epp.MergeError):
        epp.merge(a, b)


@given(st.integers(0, 10 ** 9))
def test_merge_idempotent(seed):
    b = gen.gen_behaviour(random.Random(seed))
    assert epp.merge(b, b) == b


@given(st.integers(0, 10 ** 9))
def test_merge_commutative(seed):
    a, b = gen.gen_mergeable_pair(random.Random(seed))
    try:
        ab = epp.merge(a, b)
    except epp.MergeError:
        with pytest.raises(epp.MergeError):
            epp.merge(b, a)
        return
    assert epp.merge(b, a) == ab


@given(st.integers(0, 10 ** 9))
def test_merge_associative_when_defined(seed):
    a, b, c = gen.gen_mergeable_triple(random.Random(seed))
    try:
        left = epp.merge(epp.merge(a, b), c)
        right = epp.merge(a, epp.merge(b, c))
    except epp.MergeError:
        return
    assert left == right


# ---------------------------------------------------------------------------
# Cross-module properties


def _annotations_of_behaviour(b) -> set:
    match b:
        case sp.Send(_, _, ann, cont) | sp.Recv(_, _, ann, cont) | sp.Choose(_, _, ann, cont):
            return ({ann} if ann else set()) | _annotations_of_behaviour(cont)
        case sp.Offer(_, left, right):
            out = set()
            for branch in (left, right):
                if branch is not None:
                    out |= {branch.ann} if branch.ann else set()
                    out |= _annotations_of_behaviour(branch.body)
            return out
        case sp.Cond(_, t, e):
            return _annotations_of_behaviour(t) | _annotations_of_behaviour(e)
        case _:
            return set()


def _annotations_of_choreography(c) -> set:
    match c:
        case Interaction(_, ann, cont):
            return ({ann} if ann else set()) | _annotations_of_choreography(cont)
        case Cond(_, _, t, e):
            return _annotations_of_choreography(t) | _annotations_of_choreography(e)
        case _:
            return set()


@given(st.integers(0, 10 ** 9))
def test_epp_output_validates_clean(seed):
    program, proc = gen.gen_projectable_program(random.Random(seed))
    assert cc.validate_program(program) == []
    assert sp.validate_proc_program(proc) == []


@given(st.integers(0, 10 ** 9))
def test_annotation_preservation(seed):
    program, proc = gen.gen_projectable_program(random.Random(seed))
    source = _annotations_of_choreography(program.main)
    for _, body in program.defs:
        source |= _annotations_of_choreography(body)
    emitted = set()
    for _, b in proc.network:
        emitted |= _annotations_of_behaviour(b)
    for body in proc.defs.values():
        emitted |= _annotations_of_behaviour(body)
    assert emitted <= source


@given(st.integers(0, 10 ** 9))
def test_nonparticipant_projects_to_end(seed):
    # A process that occurs nowhere projects every clause to End, so even
    # unprojectable choreographies project cleanly for it.
    program = gen.gen_chor_program(random.Random(seed))
    defs = program.defs_map()
    outsider = "Zebra"
    assert outsider not in cc.process_set(program.main, defs)
    assert epp.project_behaviour(program.main, outsider, defs) == sp.End()
