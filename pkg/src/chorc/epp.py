"""Endpoint projection: compile a choreography into one behaviour per
process, merging the branches of conditionals for processes that are not
the decider."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import cc, sp
from .cc import Path, ProcName, ProcessId


class MergeError(Exception):
    """Raised by merge when two behaviours have no common refinement.

    kind is "merge_conflict" (incompatible head constructors or head data)
    or "annotation_conflict" (both offer branches present with different
    annotations). rel_path locates the failure inside the merged term.
    """

    def __init__(self, kind: str, detail: str, rel_path: Path):
        super().__init__(f"{kind} at {list(rel_path)}: {detail}")
        self.kind = kind
        self.detail = detail
        self.rel_path = rel_path


class ProjectionError(Exception):
    """A choreography is not projectable for some process.

    path addresses the conditional whose branch projections failed to
    merge (owner None = main, otherwise the named procedure body), so the
    frontend can map it back to a source span.
    """

    def __init__(self, kind: str, pid: ProcessId, owner: Optional[ProcName],
                 path: Path, detail: str):
        where = "main" if owner is None else f"def {owner}"
        super().__init__(
            f"{kind} projecting '{pid}' at {where}{list(path)}: {detail}")
        self.kind = kind
        self.pid = pid
        self.owner = owner
        self.path = path
        self.detail = detail


def _head_data(b: sp.Behaviour) -> str:
    match b:
        case sp.Send(to, expr, ann, _):
            return f"send to {to} ({expr!r}, ann={ann!r})"
        case sp.Recv(sender, target, ann, _):
            return f"recv from {sender} into {target} (ann={ann!r})"
        case sp.Choose(to, label, ann, _):
            return f"choose {label.value} at {to} (ann={ann!r})"
        case sp.Offer(chooser, _, _):
            return f"offer from {chooser}"
        case sp.Cond(guard, _, _):
            return f"cond on {guard!r}"
        case sp.Call(proc):
            return f"call {proc}"
        case _:
            return "end"


def merge(a: sp.Behaviour, b: sp.Behaviour, _path: Path = ()) -> sp.Behaviour:
    """Combine the two branch projections of a conditional.

    Every clause requires identical head data; offers union their branches,
    and a branch present on both sides must carry the same annotation.
    """
    match (a, b):
        case (sp.End(), sp.End()):
            return a
        case (sp.Send(t1, e1, a1, c1), sp.Send(t2, e2, a2, c2)) if (t1, e1, a1) == (t2, e2, a2):
            return sp.Send(t1, e1, a1, merge(c1, c2, _path + (0,)))
        case (sp.Recv(s1, v1, a1, c1), sp.Recv(s2, v2, a2, c2)) if (s1, v1, a1) == (s2, v2, a2):
            return sp.Recv(s1, v1, a1, merge(c1, c2, _path + (0,)))
        case (sp.Choose(t1, l1, a1, c1), sp.Choose(t2, l2, a2, c2)) if (t1, l1, a1) == (t2, l2, a2):
            return sp.Choose(t1, l1, a1, merge(c1, c2, _path + (0,)))
        case (sp.Cond(g1, t1, e1), sp.Cond(g2, t2, e2)) if g1 == g2:
            return sp.Cond(g1, merge(t1, t2, _path + (0,)), merge(e1, e2, _path + (1,)))
        case (sp.Call(p1), sp.Call(p2)) if p1 == p2:
            return a
        case (sp.Offer(p1, l1, r1), sp.Offer(p2, l2, r2)) if p1 == p2:
            return sp.Offer(p1,
                            _merge_opt(l1, l2, _path + (0,)),
                            _merge_opt(r1, r2, _path + (1,)))
    raise MergeError("merge_conflict",
                     f"{_head_data(a)} vs {_head_data(b)}", _path)


def _merge_opt(x: Optional[sp.OfferBranch], y: Optional[sp.OfferBranch],
               path: Path) -> Optional[sp.OfferBranch]:
    if x is None:
        return y
    if y is None:
        return x
    if x.ann != y.ann:
        raise MergeError("annotation_conflict",
                         f"{x.ann!r} vs {y.ann!r}", path)
    return sp.OfferBranch(x.ann, merge(x.body, y.body, path))


def project_behaviour(c: cc.Choreography, r: ProcessId, defs,
                      owner: Optional[ProcName] = None) -> sp.Behaviour:
    """Project choreography c onto process r.

    defs maps procedure names to bodies and is needed to decide whether r
    participates in a called procedure; non-participants get End.
    """
    return _project(c, r, defs, owner, ())


def _project(c, r, defs, owner, path: Path) -> sp.Behaviour:
    match c:
        case cc.End():
            return sp.End()
        case cc.Interaction(cc.Com(p, e, q, x), ann, cont):
            body = _project(cont, r, defs, owner, path + (0,))
            if r == p:
                return sp.Send(q, e, ann, body)
            if r == q:
                return sp.Recv(p, x, ann, body)
            return body
        case cc.Interaction(cc.Sel(p, q, label), ann, cont):
            body = _project(cont, r, defs, owner, path + (0,))
            if r == p:
                return sp.Choose(q, label, ann, body)
            if r == q:
                branch = sp.OfferBranch(ann, body)
                if label is cc.Label.LEFT:
                    return sp.Offer(p, branch, None)
                return sp.Offer(p, None, branch)
            return body
        case cc.Cond(p, guard, then_branch, else_branch):
            bt = _project(then_branch, r, defs, owner, path + (0,))
            be = _project(else_branch, r, defs, owner, path + (1,))
            if r == p:
                return sp.Cond(guard, bt, be)
            try:
                return merge(bt, be)
            except MergeError as err:
                raise ProjectionError(err.kind, r, owner, path, err.detail) from err
        case cc.Call(proc):
            if r in cc.process_set(defs[proc], defs):
                return sp.Call(proc)
            return sp.End()
    raise TypeError(f"not a choreography: {c!r}")


def epp(program: cc.ChorProgram) -> sp.ProcProgram:
    """Project a whole program; raises ProjectionError on the first failure.

    The network lists processes in order of first syntactic occurrence in
    main. Only procedures reachable from main are projected, each for the
    participants of its own body.
    """
    defs = program.defs_map()
    network = tuple(
        (r, project_behaviour(program.main, r, defs, owner=None))
        for r in cc.process_list(program.main, defs))
    reachable = cc.reachable_procs(program.main, defs)
    proc_defs: sp.ProcDefs = {}
    for name, body in program.defs:
        if name not in reachable:
            continue
        for r in cc.process_list(body, defs):
            proc_defs[(name, r)] = project_behaviour(body, r, defs, owner=name)
    return sp.ProcProgram(defs=proc_defs, network=network)
