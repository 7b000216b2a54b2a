"""Global choreography terms and the local expression language.

A choreography describes the interactions of several named processes from a
single shared viewpoint: value communications, binary label selections,
conditionals decided by one process, and tail calls to named procedures.
Expressions come in two modes: a small evaluable language (ints, strings,
bools) that the interpreters can run, and opaque strings that are pasted
verbatim by the code generator and are never evaluated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

ProcessId = str
VarName = str
ProcName = str
Annotation = Optional[str]

# Child-index path from the root of one choreography (or behaviour) term.
Path = tuple[int, ...]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

BINARY_OPS = ("+", "-", "*", "++", "==", "<", "and", "or")
_INT_OPS = ("+", "-", "*")
_BOOL_OPS = ("and", "or")


def is_ident(name: str) -> bool:
    return bool(IDENT_RE.match(name))


class Label(Enum):
    LEFT = "left"
    RIGHT = "right"


# ---------------------------------------------------------------------------
# Values and expressions


@dataclass(frozen=True)
class VInt:
    value: int


@dataclass(frozen=True)
class VStr:
    value: str


@dataclass(frozen=True)
class VBool:
    value: bool


Value = Union[VInt, VStr, VBool]


def value_tag(v: Value) -> str:
    return {VInt: "int", VStr: "str", VBool: "bool"}[type(v)]


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Var:
    name: VarName


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class Opaque:
    text: str


Expr = Union[Lit, Var, BinOp, Not, Opaque]
# Guard expressions share the expression syntax; evaluation of a guard must
# yield a bool or a typed error.
BoolExpr = Expr


class EvalError(Exception):
    """Base class for expression evaluation failures."""


class UnboundVariable(EvalError):
    def __init__(self, name: VarName):
        super().__init__(f"unbound variable '{name}'")
        self.name = name


class TypeMismatch(EvalError):
    def __init__(self, op: str, got: str):
        super().__init__(f"operator '{op}' applied to {got}")
        self.op = op
        self.got = got


class OpaqueNotEvaluable(EvalError):
    def __init__(self, text: str):
        super().__init__(f"opaque expression {text!r} cannot be evaluated")
        self.text = text


Store = dict  # VarName -> Value
Memory = dict  # ProcessId -> Store


def eval_expr(e: Expr, store: Store) -> Value:
    """Big-step evaluation of an opaque-free expression over a store.

    Unbound variables and ill-typed operator applications raise; they are
    never hidden behind defaults, since a silent default would mask
    projection bugs downstream.
    """
    match e:
        case Lit(v):
            return v
        case Var(name):
            if name not in store:
                raise UnboundVariable(name)
            return store[name]
        case Not(inner):
            v = eval_expr(inner, store)
            if not isinstance(v, VBool):
                raise TypeMismatch("not", value_tag(v))
            return VBool(not v.value)
        case BinOp(op, le, re_):
            lv = eval_expr(le, store)
            rv = eval_expr(re_, store)
            return _apply_binop(op, lv, rv)
        case Opaque(text):
            raise OpaqueNotEvaluable(text)
    raise TypeError(f"not an expression: {e!r}")


def _apply_binop(op: str, lv: Value, rv: Value) -> Value:
    tags = f"{value_tag(lv)}, {value_tag(rv)}"
    if op in _INT_OPS:
        if not (isinstance(lv, VInt) and isinstance(rv, VInt)):
            raise TypeMismatch(op, tags)
        return VInt({"+": lv.value + rv.value,
                     "-": lv.value - rv.value,
                     "*": lv.value * rv.value}[op])
    if op == "++":
        if not (isinstance(lv, VStr) and isinstance(rv, VStr)):
            raise TypeMismatch(op, tags)
        return VStr(lv.value + rv.value)
    if op == "==":
        # Structural comparison; values of different tags are simply unequal.
        return VBool(lv == rv)
    if op == "<":
        if not (isinstance(lv, VInt) and isinstance(rv, VInt)):
            raise TypeMismatch(op, tags)
        return VBool(lv.value < rv.value)
    if op in _BOOL_OPS:
        if not (isinstance(lv, VBool) and isinstance(rv, VBool)):
            raise TypeMismatch(op, tags)
        return VBool(lv.value and rv.value if op == "and" else lv.value or rv.value)
    raise TypeMismatch(op, tags)


def eval_guard(e: BoolExpr, store: Store) -> bool:
    v = eval_expr(e, store)
    if not isinstance(v, VBool):
        raise TypeMismatch("if", value_tag(v))
    return v.value


# ---------------------------------------------------------------------------
# Choreography terms


@dataclass(frozen=True)
class Com:
    sender: ProcessId
    expr: Expr
    receiver: ProcessId
    target: VarName


@dataclass(frozen=True)
class Sel:
    chooser: ProcessId
    target: ProcessId
    label: Label


Eta = Union[Com, Sel]


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class Interaction:
    eta: Eta
    ann: Annotation
    cont: "Choreography"


@dataclass(frozen=True)
class Cond:
    decider: ProcessId
    guard: BoolExpr
    then_branch: "Choreography"
    else_branch: "Choreography"


@dataclass(frozen=True)
class Call:
    proc: ProcName


Choreography = Union[End, Interaction, Cond, Call]


@dataclass(frozen=True)
class ChorProgram:
    """Named procedure definitions plus the main choreography.

    defs is an ordered sequence of (name, body) pairs so that duplicate
    names are representable and can be reported by validation.
    """

    defs: tuple[tuple[ProcName, Choreography], ...]
    main: Choreography

    def defs_map(self) -> dict:
        out: dict = {}
        for name, body in self.defs:
            out.setdefault(name, body)
        return out


def eta_pids(eta: Eta) -> tuple[ProcessId, ProcessId]:
    if isinstance(eta, Com):
        return (eta.sender, eta.receiver)
    return (eta.chooser, eta.target)


# ---------------------------------------------------------------------------
# Well-formedness


@dataclass(frozen=True)
class WellFormednessError:
    kind: str
    owner: Optional[ProcName]  # None = main choreography
    path: Path
    detail: str

    def __str__(self) -> str:
        where = "main" if self.owner is None else f"def {self.owner}"
        return f"{self.kind} in {where} at {list(self.path)}: {self.detail}"


def validate_program(p: ChorProgram) -> list:
    """Check all structural invariants; an empty list means well-formed.

    Covered: identifier lexical rules, nonempty annotations, no
    self-communication, calls resolve to a definition, no duplicate
    definitions, only known operators in expressions.
    """
    errors: list = []
    seen: set = set()
    def_names = {name for name, _ in p.defs}
    for name, _ in p.defs:
        if not is_ident(name):
            errors.append(WellFormednessError(
                "bad_identifier", name, (), f"procedure name '{name}'"))
        if name in seen:
            errors.append(WellFormednessError(
                "duplicate_definition", name, (), f"procedure '{name}' defined twice"))
        seen.add(name)
    _walk_wf(p.main, None, (), def_names, errors)
    for name, body in p.defs:
        _walk_wf(body, name, (), def_names, errors)
    return errors


def _check_pid(pid: ProcessId, owner, path, errors, what="process") -> None:
    if not is_ident(pid):
        errors.append(WellFormednessError("bad_identifier", owner, path, f"{what} '{pid}'"))


def _check_expr(e: Expr, owner, path, errors) -> None:
    match e:
        case Lit(_) | Opaque(_):
            pass
        case Var(name):
            if not is_ident(name):
                errors.append(WellFormednessError(
                    "bad_identifier", owner, path, f"variable '{name}'"))
        case Not(inner):
            _check_expr(inner, owner, path, errors)
        case BinOp(op, le, re_):
            if op not in BINARY_OPS:
                errors.append(WellFormednessError(
                    "unknown_operator", owner, path, f"operator '{op}'"))
            _check_expr(le, owner, path, errors)
            _check_expr(re_, owner, path, errors)


def _check_ann(ann: Annotation, owner, path, errors) -> None:
    if ann is not None and ann == "":
        errors.append(WellFormednessError(
            "empty_annotation", owner, path, "annotation present but empty"))


def _walk_wf(c: Choreography, owner, path: Path, def_names, errors) -> None:
    match c:
        case End():
            return
        case Interaction(eta, ann, cont):
            _check_ann(ann, owner, path, errors)
            if isinstance(eta, Com):
                _check_pid(eta.sender, owner, path, errors)
                _check_pid(eta.receiver, owner, path, errors)
                _check_pid(eta.target, owner, path, errors, what="variable")
                _check_expr(eta.expr, owner, path, errors)
                if eta.sender == eta.receiver:
                    errors.append(WellFormednessError(
                        "self_communication", owner, path,
                        f"'{eta.sender}' communicates with itself"))
            else:
                _check_pid(eta.chooser, owner, path, errors)
                _check_pid(eta.target, owner, path, errors)
                if eta.chooser == eta.target:
                    errors.append(WellFormednessError(
                        "self_communication", owner, path,
                        f"'{eta.chooser}' selects towards itself"))
            _walk_wf(cont, owner, path + (0,), def_names, errors)
        case Cond(decider, guard, then_branch, else_branch):
            _check_pid(decider, owner, path, errors)
            _check_expr(guard, owner, path, errors)
            _walk_wf(then_branch, owner, path + (0,), def_names, errors)
            _walk_wf(else_branch, owner, path + (1,), def_names, errors)
        case Call(proc):
            if not is_ident(proc):
                errors.append(WellFormednessError(
                    "bad_identifier", owner, path, f"procedure name '{proc}'"))
            elif proc not in def_names:
                errors.append(WellFormednessError(
                    "unbound_procedure", owner, path, f"procedure '{proc}' is not defined"))


# ---------------------------------------------------------------------------
# Process sets


def process_list(c: Choreography, defs) -> list:
    """Processes participating in c, in order of first syntactic occurrence.

    Calls contribute the participants of their body, transitively; a visited
    set over procedure names makes the computation a terminating fixpoint.
    """
    seen: dict = {}
    visited: set = set()

    def walk(t: Choreography) -> None:
        match t:
            case End():
                return
            case Interaction(eta, _, cont):
                for pid in eta_pids(eta):
                    seen.setdefault(pid, None)
                walk(cont)
            case Cond(decider, _, then_branch, else_branch):
                seen.setdefault(decider, None)
                walk(then_branch)
                walk(else_branch)
            case Call(proc):
                if proc not in visited:
                    visited.add(proc)
                    walk(defs[proc])

    walk(c)
    return list(seen)


def process_set(c: Choreography, defs) -> set:
    """Least fixpoint of participating process ids (see process_list)."""
    return set(process_list(c, defs))


def reachable_procs(c: Choreography, defs) -> set:
    """Procedure names reachable from c through calls, transitively."""
    out: set = set()

    def walk(t: Choreography) -> None:
        match t:
            case Interaction(_, _, cont):
                walk(cont)
            case Cond(_, _, then_branch, else_branch):
                walk(then_branch)
                walk(else_branch)
            case Call(proc):
                if proc not in out:
                    out.add(proc)
                    walk(defs[proc])
            case _:
                pass

    walk(c)
    return out
