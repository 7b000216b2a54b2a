"""Canonical JSON form of the process IR.

Every node is an object with a "kind" discriminator; annotations are
strings or null; dumps are emitted with sorted keys and two-space
indentation so golden files are byte-stable. load_ir rejects malformed
documents with one message per problem, each prefixed by its JSON path.
"""

from __future__ import annotations

import json

from . import cc, sp
from .cc import Label


class IrFormatError(Exception):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# ---------------------------------------------------------------------------
# Dumping


def value_to_obj(v: cc.Value) -> dict:
    match v:
        case cc.VInt(n):
            return {"kind": "int", "value": n}
        case cc.VStr(s):
            return {"kind": "str", "value": s}
        case cc.VBool(b):
            return {"kind": "bool", "value": b}
    raise TypeError(f"not a value: {v!r}")


def expr_to_obj(e: cc.Expr) -> dict:
    match e:
        case cc.Lit(v):
            return {"kind": "lit", "value": value_to_obj(v)}
        case cc.Var(name):
            return {"kind": "var", "name": name}
        case cc.BinOp(op, left, right):
            return {"kind": "binop", "op": op,
                    "left": expr_to_obj(left), "right": expr_to_obj(right)}
        case cc.Not(inner):
            return {"kind": "not", "expr": expr_to_obj(inner)}
        case cc.Opaque(text):
            return {"kind": "opaque", "text": text}
    raise TypeError(f"not an expression: {e!r}")


def behaviour_to_obj(b: sp.Behaviour) -> dict:
    match b:
        case sp.End():
            return {"kind": "end"}
        case sp.Send(to, expr, ann, cont):
            return {"kind": "send", "to": to, "expr": expr_to_obj(expr),
                    "ann": ann, "cont": behaviour_to_obj(cont)}
        case sp.Recv(sender, target, ann, cont):
            return {"kind": "recv", "from": sender, "target": target,
                    "ann": ann, "cont": behaviour_to_obj(cont)}
        case sp.Choose(to, label, ann, cont):
            return {"kind": "choose", "to": to, "label": label.value,
                    "ann": ann, "cont": behaviour_to_obj(cont)}
        case sp.Offer(chooser, left, right):
            return {"kind": "offer", "from": chooser,
                    "left": _branch_to_obj(left), "right": _branch_to_obj(right)}
        case sp.Cond(guard, then_branch, else_branch):
            return {"kind": "cond", "guard": expr_to_obj(guard),
                    "then": behaviour_to_obj(then_branch),
                    "else": behaviour_to_obj(else_branch)}
        case sp.Call(proc):
            return {"kind": "call", "proc": proc}
    raise TypeError(f"not a behaviour: {b!r}")


def _branch_to_obj(branch):
    if branch is None:
        return None
    return {"ann": branch.ann, "body": behaviour_to_obj(branch.body)}


def program_to_obj(p: sp.ProcProgram) -> dict:
    return {
        "defs": [{"proc": proc, "pid": pid, "body": behaviour_to_obj(body)}
                 for (proc, pid), body in p.defs.items()],
        "network": [{"pid": pid, "behaviour": behaviour_to_obj(b)}
                    for pid, b in p.network],
    }


def dump_ir(p: sp.ProcProgram) -> str:
    return json.dumps(program_to_obj(p), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Loading


class _Loader:
    def __init__(self):
        self.errors: list = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def obj(self, x, path: str):
        if not isinstance(x, dict):
            self.fail(path, f"expected an object, got {type(x).__name__}")
            return None
        return x

    def string(self, x, path: str, field: str):
        if field not in x:
            self.fail(path, f"missing field '{field}'")
            return None
        v = x[field]
        if not isinstance(v, str):
            self.fail(f"{path}.{field}", "expected a string")
            return None
        return v

    def nullable_string(self, x, path: str, field: str):
        if field not in x:
            self.fail(path, f"missing field '{field}'")
            return None
        v = x[field]
        if v is not None and not isinstance(v, str):
            self.fail(f"{path}.{field}", "expected a string or null")
            return None
        return v

    def value(self, x, path: str):
        x = self.obj(x, path)
        if x is None:
            return cc.VInt(0)
        kind = self.string(x, path, "kind")
        if "value" not in x:
            self.fail(path, "missing field 'value'")
            return cc.VInt(0)
        v = x["value"]
        if kind == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                self.fail(f"{path}.value", "expected an integer")
                return cc.VInt(0)
            return cc.VInt(v)
        if kind == "str":
            if not isinstance(v, str):
                self.fail(f"{path}.value", "expected a string")
                return cc.VStr("")
            return cc.VStr(v)
        if kind == "bool":
            if not isinstance(v, bool):
                self.fail(f"{path}.value", "expected a boolean")
                return cc.VBool(False)
            return cc.VBool(v)
        self.fail(path, f"unknown value kind {kind!r}")
        return cc.VInt(0)

    def expr(self, x, path: str) -> cc.Expr:
        x = self.obj(x, path)
        if x is None:
            return cc.Lit(cc.VInt(0))
        kind = self.string(x, path, "kind")
        if kind == "lit":
            if "value" not in x:
                self.fail(path, "missing field 'value'")
                return cc.Lit(cc.VInt(0))
            return cc.Lit(self.value(x["value"], f"{path}.value"))
        if kind == "var":
            return cc.Var(self.string(x, path, "name") or "")
        if kind == "binop":
            op = self.string(x, path, "op") or "+"
            if op not in cc.BINARY_OPS:
                self.fail(f"{path}.op", f"unknown operator {op!r}")
            left = self.expr(x.get("left"), f"{path}.left") if "left" in x \
                else self._missing_expr(path, "left")
            right = self.expr(x.get("right"), f"{path}.right") if "right" in x \
                else self._missing_expr(path, "right")
            return cc.BinOp(op, left, right)
        if kind == "not":
            inner = self.expr(x.get("expr"), f"{path}.expr") if "expr" in x \
                else self._missing_expr(path, "expr")
            return cc.Not(inner)
        if kind == "opaque":
            return cc.Opaque(self.string(x, path, "text") or "")
        self.fail(path, f"unknown expression kind {kind!r}")
        return cc.Lit(cc.VInt(0))

    def _missing_expr(self, path: str, field: str) -> cc.Expr:
        self.fail(path, f"missing field '{field}'")
        return cc.Lit(cc.VInt(0))

    def behaviour(self, x, path: str) -> sp.Behaviour:
        x = self.obj(x, path)
        if x is None:
            return sp.End()
        kind = self.string(x, path, "kind")
        if kind == "end":
            return sp.End()
        if kind == "send":
            return sp.Send(self.string(x, path, "to") or "",
                           self.expr(x.get("expr"), f"{path}.expr") if "expr" in x
                           else self._missing_expr(path, "expr"),
                           self.nullable_string(x, path, "ann"),
                           self._cont(x, path))
        if kind == "recv":
            return sp.Recv(self.string(x, path, "from") or "",
                           self.string(x, path, "target") or "",
                           self.nullable_string(x, path, "ann"),
                           self._cont(x, path))
        if kind == "choose":
            return sp.Choose(self.string(x, path, "to") or "",
                             self._label(x, path),
                             self.nullable_string(x, path, "ann"),
                             self._cont(x, path))
        if kind == "offer":
            left = self._branch(x, path, "left")
            right = self._branch(x, path, "right")
            if left is None and right is None:
                self.fail(path, "offer has no branches")
            return sp.Offer(self.string(x, path, "from") or "", left, right)
        if kind == "cond":
            guard = self.expr(x.get("guard"), f"{path}.guard") if "guard" in x \
                else self._missing_expr(path, "guard")
            then_b = self.behaviour(x.get("then"), f"{path}.then") if "then" in x \
                else self._missing_behaviour(path, "then")
            else_b = self.behaviour(x.get("else"), f"{path}.else") if "else" in x \
                else self._missing_behaviour(path, "else")
            return sp.Cond(guard, then_b, else_b)
        if kind == "call":
            return sp.Call(self.string(x, path, "proc") or "")
        self.fail(path, f"unknown behaviour kind {kind!r}")
        return sp.End()

    def _missing_behaviour(self, path: str, field: str) -> sp.Behaviour:
        self.fail(path, f"missing field '{field}'")
        return sp.End()

    def _cont(self, x, path: str) -> sp.Behaviour:
        if "cont" not in x:
            return self._missing_behaviour(path, "cont")
        return self.behaviour(x["cont"], f"{path}.cont")

    def _label(self, x, path: str) -> Label:
        text = self.string(x, path, "label")
        if text == "left":
            return Label.LEFT
        if text == "right":
            return Label.RIGHT
        if text is not None:
            self.fail(f"{path}.label", f"unknown label {text!r}")
        return Label.LEFT

    def _branch(self, x, path: str, field: str):
        if field not in x:
            self.fail(path, f"missing field '{field}'")
            return None
        v = x[field]
        if v is None:
            return None
        v = self.obj(v, f"{path}.{field}")
        if v is None:
            return None
        ann = self.nullable_string(v, f"{path}.{field}", "ann")
        body = self.behaviour(v.get("body"), f"{path}.{field}.body") if "body" in v \
            else self._missing_behaviour(f"{path}.{field}", "body")
        return sp.OfferBranch(ann, body)

    def program(self, x) -> sp.ProcProgram:
        x = self.obj(x, "$")
        if x is None:
            return sp.ProcProgram({}, ())
        defs: sp.ProcDefs = {}
        raw_defs = x.get("defs")
        if raw_defs is None:
            self.fail("$", "missing field 'defs'")
            raw_defs = []
        if not isinstance(raw_defs, list):
            self.fail("$.defs", "expected a list")
            raw_defs = []
        for i, entry in enumerate(raw_defs):
            path = f"$.defs[{i}]"
            entry = self.obj(entry, path)
            if entry is None:
                continue
            proc = self.string(entry, path, "proc")
            pid = self.string(entry, path, "pid")
            body = self.behaviour(entry.get("body"), f"{path}.body") if "body" in entry \
                else self._missing_behaviour(path, "body")
            if proc is None or pid is None:
                continue
            if (proc, pid) in defs:
                self.fail(path, f"duplicate definition ({proc!r}, {pid!r})")
                continue
            defs[(proc, pid)] = body
        network = []
        raw_net = x.get("network")
        if raw_net is None:
            self.fail("$", "missing field 'network'")
            raw_net = []
        if not isinstance(raw_net, list):
            self.fail("$.network", "expected a list")
            raw_net = []
        for i, entry in enumerate(raw_net):
            path = f"$.network[{i}]"
            entry = self.obj(entry, path)
            if entry is None:
                continue
            pid = self.string(entry, path, "pid")
            b = self.behaviour(entry.get("behaviour"), f"{path}.behaviour") \
                if "behaviour" in entry else self._missing_behaviour(path, "behaviour")
            if pid is not None:
                network.append((pid, b))
        return sp.ProcProgram(defs, tuple(network))


def load_ir(text: str) -> sp.ProcProgram:
    """Inverse of dump_ir; raises IrFormatError listing every violation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise IrFormatError([f"$: invalid JSON: {e}"]) from e
    loader = _Loader()
    program = loader.program(doc)
    if loader.errors:
        raise IrFormatError(loader.errors)
    return program
