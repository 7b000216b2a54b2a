"""Per-process behaviours: the intermediate representation produced by
projection and consumed by the simulator and the code generator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import cc
from .cc import Annotation, Expr, Label, Path, ProcName, ProcessId, VarName


@dataclass(frozen=True)
class End:
    pass


@dataclass(frozen=True)
class Send:
    to: ProcessId
    expr: Expr
    ann: Annotation
    cont: "Behaviour"


@dataclass(frozen=True)
class Recv:
    sender: ProcessId
    target: VarName
    ann: Annotation
    cont: "Behaviour"


@dataclass(frozen=True)
class Choose:
    to: ProcessId
    label: Label
    ann: Annotation
    cont: "Behaviour"


@dataclass(frozen=True)
class OfferBranch:
    ann: Annotation
    body: "Behaviour"


@dataclass(frozen=True)
class Offer:
    chooser: ProcessId
    left: Optional[OfferBranch]
    right: Optional[OfferBranch]


@dataclass(frozen=True)
class Cond:
    guard: cc.BoolExpr
    then_branch: "Behaviour"
    else_branch: "Behaviour"


@dataclass(frozen=True)
class Call:
    proc: ProcName


Behaviour = Union[End, Send, Recv, Choose, Offer, Cond, Call]

# (procedure name, process) -> projected body
ProcDefs = dict
# ordered (process, behaviour) pairs
Network = tuple


@dataclass
class ProcProgram:
    defs: ProcDefs
    network: Network

    def network_pids(self) -> list:
        return [pid for pid, _ in self.network]

    def behaviour_of(self, pid: ProcessId) -> Behaviour:
        for p, b in self.network:
            if p == pid:
                return b
        raise KeyError(pid)


def behaviour_equal(a: Behaviour, b: Behaviour) -> bool:
    """Structural equality, annotations included."""
    return a == b


def head_name(b: Behaviour) -> str:
    return {End: "end", Send: "send", Recv: "recv", Choose: "choose",
            Offer: "offer", Cond: "cond", Call: "call"}[type(b)]


def children(b: Behaviour) -> tuple:
    """Child subterms in path order (index into this tuple = path component)."""
    match b:
        case Send(_, _, _, cont) | Recv(_, _, _, cont) | Choose(_, _, _, cont):
            return (cont,)
        case Offer(_, left, right):
            out = []
            out.append(left.body if left is not None else None)
            out.append(right.body if right is not None else None)
            return tuple(out)
        case Cond(_, then_branch, else_branch):
            return (then_branch, else_branch)
        case _:
            return ()


@dataclass(frozen=True)
class SpError:
    kind: str
    pid: ProcessId
    proc: Optional[ProcName]  # None = network entry, else defs entry
    path: Path
    detail: str

    def __str__(self) -> str:
        where = f"process {self.pid}" if self.proc is None else f"def ({self.proc}, {self.pid})"
        return f"{self.kind} in {where} at {list(self.path)}: {self.detail}"


def validate_proc_program(p: ProcProgram) -> list:
    """Check IR invariants; empty list means well-formed.

    Offers with zero branches are rejected even though the type admits
    them: projection can never produce one, so seeing one always means a
    corrupted or hand-edited IR.
    """
    errors: list = []
    pids = [pid for pid, _ in p.network]
    known = set()
    for pid in pids:
        if not cc.is_ident(pid):
            errors.append(SpError("bad_identifier", pid, None, (), f"process '{pid}'"))
        if pid in known:
            errors.append(SpError("duplicate_pid", pid, None, (), f"process '{pid}' listed twice"))
        known.add(pid)
    def_keys = set(p.defs)
    for pid, b in p.network:
        _walk(b, pid, None, (), known, def_keys, errors)
    for (proc, pid), b in p.defs.items():
        if pid not in known:
            errors.append(SpError("unknown_peer", pid, proc, (),
                                  f"definition owner '{pid}' is not in the network"))
        _walk(b, pid, proc, (), known, def_keys, errors)
    return errors


def _peer(pid, peer, proc, path, known, errors) -> None:
    if peer not in known:
        errors.append(SpError("unknown_peer", pid, proc, path,
                              f"peer '{peer}' is not in the network"))


def _ann_ok(pid, ann, proc, path, errors) -> None:
    if ann is not None and ann == "":
        errors.append(SpError("empty_annotation", pid, proc, path,
                              "annotation present but empty"))


def _walk(b: Behaviour, pid, proc, path: Path, known, def_keys, errors) -> None:
    match b:
        case End():
            return
        case Send(to, _, ann, cont):
            _peer(pid, to, proc, path, known, errors)
            _ann_ok(pid, ann, proc, path, errors)
            _walk(cont, pid, proc, path + (0,), known, def_keys, errors)
        case Recv(sender, target, ann, cont):
            _peer(pid, sender, proc, path, known, errors)
            if not cc.is_ident(target):
                errors.append(SpError("bad_identifier", pid, proc, path, f"variable '{target}'"))
            _ann_ok(pid, ann, proc, path, errors)
            _walk(cont, pid, proc, path + (0,), known, def_keys, errors)
        case Choose(to, _, ann, cont):
            _peer(pid, to, proc, path, known, errors)
            _ann_ok(pid, ann, proc, path, errors)
            _walk(cont, pid, proc, path + (0,), known, def_keys, errors)
        case Offer(chooser, left, right):
            _peer(pid, chooser, proc, path, known, errors)
            if left is None and right is None:
                errors.append(SpError("empty_offer", pid, proc, path,
                                      "offer with no branches"))
            if left is not None:
                _ann_ok(pid, left.ann, proc, path, errors)
                _walk(left.body, pid, proc, path + (0,), known, def_keys, errors)
            if right is not None:
                _ann_ok(pid, right.ann, proc, path, errors)
                _walk(right.body, pid, proc, path + (1,), known, def_keys, errors)
        case Cond(_, then_branch, else_branch):
            _walk(then_branch, pid, proc, path + (0,), known, def_keys, errors)
            _walk(else_branch, pid, proc, path + (1,), known, def_keys, errors)
        case Call(name):
            if (name, pid) not in def_keys:
                errors.append(SpError("unbound_procedure", pid, proc, path,
                                      f"no projection of '{name}' for '{pid}'"))
