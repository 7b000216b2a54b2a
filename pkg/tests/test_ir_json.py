import json
import random

import pytest
from hypothesis import given, strategies as st

from chorc import cc, epp, ir_json, sp
from chorc.cc import Lit, VInt

from conftest import GOLDEN, auth_program
import gen


def test_end_behaviour_object():
    assert ir_json.behaviour_to_obj(sp.End()) == {"kind": "end"}


def test_golden_auth_ir_round_trip():
    text = (GOLDEN / "auth.ir.json").read_text()
    loaded = ir_json.load_ir(text)
    assert loaded == epp.epp(auth_program())
    assert ir_json.dump_ir(loaded) == text


def test_dump_is_deterministic():
    proc = epp.epp(auth_program())
    assert ir_json.dump_ir(proc) == ir_json.dump_ir(proc)


def test_dump_end_network_round_trip():
    proc = sp.ProcProgram({}, (("p", sp.End()),))
    assert ir_json.load_ir(ir_json.dump_ir(proc)) == proc


@given(st.integers(0, 10 ** 9))
def test_round_trip_generated_programs(seed):
    proc = gen.gen_proc_program(random.Random(seed))
    assert ir_json.load_ir(ir_json.dump_ir(proc)) == proc


def _load_errors(doc) -> list:
    with pytest.raises(ir_json.IrFormatError) as exc:
        ir_json.load_ir(json.dumps(doc))
    return exc.value.errors


def test_load_rejects_unknown_kind():
    errors = _load_errors({"defs": [], "network": [
        {"pid": "p", "behaviour": {"kind": "snd"}}]})
    assert any("$.network[0].behaviour" in e and "snd" in e for e in errors)


def test_load_rejects_missing_field():
    errors = _load_errors({"defs": [], "network": [
        {"pid": "p", "behaviour": {"kind": "send", "to": "q",
                                   "expr": {"kind": "var", "name": "x"},
                                   "cont": {"kind": "end"}}}]})
    assert any("missing field 'ann'" in e for e in errors)


def test_load_rejects_zero_branch_offer():
    errors = _load_errors({"defs": [], "network": [
        {"pid": "p", "behaviour": {"kind": "offer", "from": "q",
                                   "left": None, "right": None}}]})
    assert any("offer has no branches" in e for e in errors)


def test_load_rejects_bool_as_int():
    errors = _load_errors({"defs": [], "network": [
        {"pid": "p", "behaviour": {
            "kind": "send", "to": "q", "ann": None,
            "expr": {"kind": "lit", "value": {"kind": "int", "value": True}},
            "cont": {"kind": "end"}}}]})
    assert any("expected an integer" in e for e in errors)


def test_load_rejects_duplicate_defs():
    body = {"kind": "end"}
    errors = _load_errors({
        "defs": [{"proc": "X", "pid": "p", "body": body},
                 {"proc": "X", "pid": "p", "body": body}],
        "network": []})
    assert any("duplicate definition" in e for e in errors)


def test_load_rejects_invalid_json():
    with pytest.raises(ir_json.IrFormatError) as exc:
        ir_json.load_ir("{nope")
    assert any("invalid JSON" in e for e in exc.value.errors)


def test_load_collects_multiple_errors():
    errors = _load_errors({"defs": [], "network": [
        {"pid": "p", "behaviour": {"kind": "snd"}},
        {"pid": "q", "behaviour": {"kind": "recv", "from": "p"}}]})
    assert len(errors) >= 2


def test_label_serialization():
    b = sp.Choose("q", cc.Label.RIGHT, None, sp.End())
    obj = ir_json.behaviour_to_obj(b)
    assert obj["label"] == "right"
    proc = sp.ProcProgram({}, (("p", b), ("q", sp.End())))
    assert ir_json.load_ir(ir_json.dump_ir(proc)) == proc


def test_arbitrary_precision_ints_survive():
    big = 10 ** 40
    proc = sp.ProcProgram({}, (("p", sp.Send("q", Lit(VInt(big)), None, sp.End())),
                               ("q", sp.Recv("p", "x", None, sp.End()))))
    assert ir_json.load_ir(ir_json.dump_ir(proc)) == proc
