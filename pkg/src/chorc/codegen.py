"""Service code generation: turn a projected network into Jolie-style
source text, one service block per process.

Operation names come from annotations where present and from a
per-channel counter otherwise. The sender side of every communication
must use the same operation name as the receiver side; rather than
assuming that the IR is a faithful projection, a pairing pass abstractly
executes the whole network (guards taken both ways, no value evaluation,
so opaque expressions are fine) and checks that every send point lines up
with compatible receive points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import cc, sp
from .cc import Label, Path, ProcessId


@dataclass
class CodegenConfig:
    base_port: int = 9000
    out_layout: str = "file-per-service"  # or "single-file"
    default_op_prefix: str = "op"


class CodegenError(Exception):
    pass


class ConfigError(CodegenError):
    pass


class PairingMismatch(CodegenError):
    def __init__(self, pid: ProcessId, path: Path, detail: str):
        super().__init__(f"cannot pair message point of '{pid}' at {list(path)}: {detail}")
        self.pid = pid
        self.path = path
        self.detail = detail


class DuplicateOperation(CodegenError):
    def __init__(self, receiver: ProcessId, name: str, detail: str):
        super().__init__(f"operation '{name}' at '{receiver}' reused incompatibly: {detail}")
        self.receiver = receiver
        self.name = name
        self.detail = detail


class InvalidOperationName(CodegenError):
    def __init__(self, receiver: ProcessId, name: str):
        super().__init__(f"annotation {name!r} at '{receiver}' is not a valid "
                         "operation identifier")
        self.receiver = receiver
        self.name = name


class OpaqueExprUnsupported(CodegenError):
    def __init__(self, text: str):
        super().__init__(f"opaque expression {text!r} contains characters "
                         "invalid in the target syntax")
        self.text = text


# A message point addresses one send/receive position in the IR.
# site is ("net", pid) or ("def", proc, pid); branch tags the side of an
# offer ("L"/"R") and is None for plain nodes.
Site = tuple


@dataclass(frozen=True)
class MsgPoint:
    site: Site
    path: Path
    branch: Optional[str]


_DIVERGED = "<diverged>"


def _roots(program: sp.ProcProgram) -> dict:
    roots = {("net", pid): b for pid, b in program.network}
    for (proc, pid), b in program.defs.items():
        roots[("def", proc, pid)] = b
    return roots


def _child(b: sp.Behaviour, i: int) -> sp.Behaviour:
    match b:
        case sp.Send(_, _, _, cont) | sp.Recv(_, _, _, cont) | sp.Choose(_, _, _, cont):
            return cont
        case sp.Offer(_, left, right):
            branch = left if i == 0 else right
            if branch is None:
                raise KeyError(f"offer has no branch {i}")
            return branch.body
        case sp.Cond(_, then_branch, else_branch):
            return then_branch if i == 0 else else_branch
    raise KeyError(f"{sp.head_name(b)} has no child {i}")


def _node_at(roots: dict, site: Site, path: Path) -> sp.Behaviour:
    node = roots[site]
    for i in path:
        node = _child(node, i)
    return node


@dataclass(frozen=True)
class _PointInfo:
    point: MsgPoint
    kind: str  # "com" | "sel"
    sender: ProcessId
    receiver: ProcessId
    ann: Optional[str]


def _collect_points(program: sp.ProcProgram):
    """All message points in canonical order: network entries first, then
    procedure entries, each walked pre-order."""
    sends: list = []
    recvs: list = []

    def walk(b, site, path, owner_pid):
        match b:
            case sp.End():
                return
            case sp.Send(to, _, ann, cont):
                sends.append(_PointInfo(MsgPoint(site, path, None), "com",
                                        owner_pid, to, ann))
                walk(cont, site, path + (0,), owner_pid)
            case sp.Recv(sender, _, ann, cont):
                recvs.append(_PointInfo(MsgPoint(site, path, None), "com",
                                        sender, owner_pid, ann))
                walk(cont, site, path + (0,), owner_pid)
            case sp.Choose(to, _, ann, cont):
                sends.append(_PointInfo(MsgPoint(site, path, None), "sel",
                                        owner_pid, to, ann))
                walk(cont, site, path + (0,), owner_pid)
            case sp.Offer(chooser, left, right):
                for tag, idx, branch in (("L", 0, left), ("R", 1, right)):
                    if branch is None:
                        continue
                    recvs.append(_PointInfo(MsgPoint(site, path, tag), "sel",
                                            chooser, owner_pid, branch.ann))
                for tag, idx, branch in (("L", 0, left), ("R", 1, right)):
                    if branch is not None:
                        walk(branch.body, site, path + (idx,), owner_pid)
            case sp.Cond(_, then_branch, else_branch):
                walk(then_branch, site, path + (0,), owner_pid)
                walk(else_branch, site, path + (1,), owner_pid)
            case sp.Call(_):
                return

    for pid, b in program.network:
        walk(b, ("net", pid), (), pid)
    for (proc, pid), b in program.defs.items():
        walk(b, ("def", proc, pid), (), pid)
    return sends, recvs


def _normalize_pos(roots, pid, site, path):
    """Advance a process position through silent call unfoldings."""
    seen = set()
    while True:
        node = _node_at(roots, site, path)
        if not isinstance(node, sp.Call):
            return (site, path)
        nxt = ("def", node.proc, pid)
        if nxt in seen:
            return _DIVERGED
        seen.add(nxt)
        site, path = nxt, ()


def _pairings(program: sp.ProcProgram, roots: dict) -> set:
    """Abstractly run the network and record every (send point, receive
    point) synchronization that can occur. Conditionals branch both ways;
    values are never evaluated."""
    order = [pid for pid, _ in program.network]
    start = tuple(_normalize_pos(roots, pid, ("net", pid), ()) for pid in order)
    index = {pid: i for i, pid in enumerate(order)}
    edges: set = set()
    visited = {start}
    stack = [start]
    while stack:
        state = stack.pop()
        for edge, succ in _sym_steps(state, order, index, roots):
            if edge is not None:
                edges.add(edge)
            if succ not in visited:
                visited.add(succ)
                stack.append(succ)
    return edges


def _sym_steps(state, order, index, roots):
    out = []
    for i, pid in enumerate(order):
        pos = state[i]
        if pos == _DIVERGED:
            continue
        site, path = pos
        node = _node_at(roots, site, path)
        match node:
            case sp.Send(to, _, _, _):
                j = index.get(to)
                if j is None or state[j] == _DIVERGED:
                    continue
                psite, ppath = state[j]
                peer = _node_at(roots, psite, ppath)
                if isinstance(peer, sp.Recv) and peer.sender == pid:
                    edge = (MsgPoint(site, path, None), MsgPoint(psite, ppath, None))
                    succ = list(state)
                    succ[i] = _normalize_pos(roots, pid, site, path + (0,))
                    succ[j] = _normalize_pos(roots, to, psite, ppath + (0,))
                    out.append((edge, tuple(succ)))
            case sp.Choose(to, label, _, _):
                j = index.get(to)
                if j is None or state[j] == _DIVERGED:
                    continue
                psite, ppath = state[j]
                peer = _node_at(roots, psite, ppath)
                if isinstance(peer, sp.Offer) and peer.chooser == pid:
                    branch = peer.left if label is Label.LEFT else peer.right
                    if branch is None:
                        raise PairingMismatch(
                            pid, path,
                            f"chose {label.value} but '{to}' offers no such branch")
                    tag, idx = ("L", 0) if label is Label.LEFT else ("R", 1)
                    edge = (MsgPoint(site, path, None), MsgPoint(psite, ppath, tag))
                    succ = list(state)
                    succ[i] = _normalize_pos(roots, pid, site, path + (0,))
                    succ[j] = _normalize_pos(roots, to, psite, ppath + (idx,))
                    out.append((edge, tuple(succ)))
            case sp.Cond(_, _, _):
                for idx in (0, 1):
                    succ = list(state)
                    succ[i] = _normalize_pos(roots, pid, site, path + (idx,))
                    out.append((None, tuple(succ)))
            case _:
                pass
    return out


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def assign_operation_names(program: sp.ProcProgram, cfg: CodegenConfig) -> dict:
    """Map every message point to its wire operation name.

    Receive points supply names (annotation text, else a generated
    "{prefix}_{sender}_{receiver}_{n}" with a per-channel counter); send
    points inherit the name of the receive points they synchronize with.
    """
    roots = _roots(program)
    sends, recvs = _collect_points(program)
    edges = _pairings(program, roots)

    uf = _UnionFind()
    for a, b in edges:
        uf.union(a, b)

    send_infos = {info.point: info for info in sends}
    recv_infos = {info.point: info for info in recvs}

    paired = set()
    for a, b in edges:
        paired.add(a)
        paired.add(b)
    for info in sends:
        if info.point not in paired:
            raise PairingMismatch(
                info.sender, info.point.path,
                f"{info.kind} towards '{info.receiver}' never synchronizes "
                "with a matching receive point")

    # Group receive points by alignment component, in canonical order.
    comp_recvs: dict = {}
    for info in recvs:
        comp_recvs.setdefault(uf.find(info.point), []).append(info)

    comp_name: dict = {}
    reserved: dict = {}  # receiver -> set of names taken by annotations
    for root, infos in comp_recvs.items():
        anns = {i.ann for i in infos if i.ann is not None}
        if len(anns) > 1:
            first = infos[0]
            raise PairingMismatch(
                first.receiver, first.point.path,
                "one communication reaches receive points with different "
                f"annotations: {sorted(anns)}")
        if anns:
            name = next(iter(anns))
            if not cc.is_ident(name):
                raise InvalidOperationName(infos[0].receiver, name)
            comp_name[root] = name
            reserved.setdefault(infos[0].receiver, set()).add(name)

    counters: dict = {}
    for info in recvs:
        root = uf.find(info.point)
        if root in comp_name:
            continue
        channel = (info.sender, info.receiver)
        taken = reserved.setdefault(info.receiver, set())
        while True:
            counters[channel] = counters.get(channel, 0) + 1
            name = f"{cfg.default_op_prefix}_{info.sender}_{info.receiver}_{counters[channel]}"
            if name not in taken:
                break
        taken.add(name)
        comp_name[root] = name

    names: dict = {}
    for info in recvs:
        names[info.point] = comp_name[uf.find(info.point)]
    for info in sends:
        names[info.point] = comp_name[uf.find(info.point)]

    _check_duplicates(recvs, names)
    return names


def _check_duplicates(recvs, names) -> None:
    # The same (receiver, name) may be reused sequentially, but only by
    # the same sender and the same kind of message; anything else would
    # make the generated inputs ambiguous on the wire.
    groups: dict = {}
    for info in recvs:
        groups.setdefault((info.receiver, names[info.point]), []).append(info)
    for (receiver, name), infos in groups.items():
        senders = {i.sender for i in infos}
        kinds = {i.kind for i in infos}
        if len(senders) > 1 or len(kinds) > 1:
            raise DuplicateOperation(
                receiver, name,
                f"used by senders {sorted(senders)} and kinds {sorted(kinds)}")


# ---------------------------------------------------------------------------
# Emission


_JOLIE_BINOP = {"+": "+", "-": "-", "*": "*", "++": "+",
                "==": "==", "<": "<", "and": "&&", "or": "||"}


def _jolie_str(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{out}"'


def render_expr(e: cc.Expr) -> str:
    match e:
        case cc.Lit(cc.VInt(n)):
            return str(n)
        case cc.Lit(cc.VStr(s)):
            return _jolie_str(s)
        case cc.Lit(cc.VBool(b)):
            return "true" if b else "false"
        case cc.Var(name):
            return name
        case cc.Not(inner):
            return f"!({render_expr(inner)})"
        case cc.BinOp(op, left, right):
            return f"{_operand(left)} {_JOLIE_BINOP[op]} {_operand(right)}"
        case cc.Opaque(text):
            if any(ord(ch) < 0x20 or ord(ch) == 0x7F for ch in text):
                raise OpaqueExprUnsupported(text)
            return text
    raise TypeError(f"not an expression: {e!r}")


def _operand(e: cc.Expr) -> str:
    if isinstance(e, cc.BinOp):
        return f"({render_expr(e)})"
    return render_expr(e)


def _body_lines(b: sp.Behaviour, site: Site, path: Path, names: dict) -> list:
    lines: list = []
    node, p = b, path
    while True:
        match node:
            case sp.End():
                return lines
            case sp.Send(to, expr, _, cont):
                lines.append(f"{names[MsgPoint(site, p, None)]}@{to}( {render_expr(expr)} )")
                node, p = cont, p + (0,)
            case sp.Recv(_, target, _, cont):
                lines.append(f"{names[MsgPoint(site, p, None)]}( {target} )")
                node, p = cont, p + (0,)
            case sp.Choose(to, _, _, cont):
                lines.append(f"{names[MsgPoint(site, p, None)]}@{to}()")
                node, p = cont, p + (0,)
            case sp.Offer(_, left, right):
                for tag, idx, branch in (("L", 0, left), ("R", 1, right)):
                    if branch is None:
                        continue
                    inner = _body_lines(branch.body, site, p + (idx,), names) or ["nullProcess"]
                    lines.append(f"[ {names[MsgPoint(site, p, tag)]}() ] {{")
                    lines.extend("  " + l for l in inner)
                    lines.append("}")
                return lines
            case sp.Cond(guard, then_branch, else_branch):
                then_lines = _body_lines(then_branch, site, p + (0,), names) or ["nullProcess"]
                else_lines = _body_lines(else_branch, site, p + (1,), names) or ["nullProcess"]
                lines.append(f"if ({render_expr(guard)}) {{")
                lines.extend("  " + l for l in then_lines)
                lines.append("} else {")
                lines.extend("  " + l for l in else_lines)
                lines.append("}")
                return lines
            case sp.Call(proc):
                lines.append(proc)
                return lines
            case _:
                raise TypeError(f"not a behaviour: {node!r}")


def _peer_targets(pid: ProcessId, behaviour: sp.Behaviour, defs: sp.ProcDefs) -> list:
    peers: dict = {}

    def walk(b):
        match b:
            case sp.Send(to, _, _, cont) | sp.Choose(to, _, _, cont):
                peers.setdefault(to, None)
                walk(cont)
            case sp.Recv(_, _, _, cont):
                walk(cont)
            case sp.Offer(_, left, right):
                for branch in (left, right):
                    if branch is not None:
                        walk(branch.body)
            case sp.Cond(_, then_branch, else_branch):
                walk(then_branch)
                walk(else_branch)
            case _:
                pass

    walk(behaviour)
    for (proc, p), body in defs.items():
        if p == pid:
            walk(body)
    return list(peers)


def emit_service(pid: ProcessId, behaviour: sp.Behaviour, defs: sp.ProcDefs,
                 names: dict, cfg: CodegenConfig, network: sp.Network) -> str:
    """One service block: deployment stub, one define per projected
    procedure, and a main mirroring the behaviour term."""
    order = [p for p, _ in network]
    idx = order.index(pid)
    ind = "  "
    lines = [f"service {pid} {{"]
    lines.append(ind + "inputPort In {")
    lines.append(ind + f'  location: "socket://localhost:{cfg.base_port + idx}"')
    lines.append(ind + "  protocol: sodep")
    lines.append(ind + "}")
    for peer in _peer_targets(pid, behaviour, defs):
        lines.append("")
        lines.append(ind + f"outputPort {peer} {{")
        lines.append(ind + f'  location: "socket://localhost:{cfg.base_port + order.index(peer)}"')
        lines.append(ind + "  protocol: sodep")
        lines.append(ind + "}")
    for (proc, p), body in defs.items():
        if p != pid:
            continue
        body_lines = _body_lines(body, ("def", proc, p), (), names) or ["nullProcess"]
        lines.append("")
        lines.append(ind + f"define {proc} {{")
        lines.extend(ind + "  " + l for l in body_lines)
        lines.append(ind + "}")
    main_lines = _body_lines(behaviour, ("net", pid), (), names) or ["nullProcess"]
    lines.append("")
    lines.append(ind + "main {")
    lines.extend(ind + "  " + l for l in main_lines)
    lines.append(ind + "}")
    lines.append("}")
    return "\n".join(lines) + "\n"


FILE_HEADER = ("// Generated service code.\n"
               "// Selections are emitted as empty-payload one-way notifications.\n")


def compile_program(program: sp.ProcProgram, cfg: Optional[CodegenConfig] = None) -> dict:
    """Emit every service; deterministic byte-for-byte for a fixed input."""
    cfg = cfg or CodegenConfig()
    if cfg.base_port + len(program.network) > 65535:
        raise ConfigError(
            f"base port {cfg.base_port} leaves no room for {len(program.network)} services")
    if cfg.out_layout not in ("file-per-service", "single-file"):
        raise ConfigError(f"unknown output layout {cfg.out_layout!r}")
    names = assign_operation_names(program, cfg)
    return {pid: emit_service(pid, b, program.defs, names, cfg, program.network)
            for pid, b in program.network}


def output_files(services: dict, cfg: CodegenConfig) -> dict:
    """Map output filename to file text for the configured layout."""
    if cfg.out_layout == "single-file":
        return {"program.ol": FILE_HEADER + "\n" + "\n".join(services.values())}
    return {f"{pid.lower()}.ol": FILE_HEADER + "\n" + text
            for pid, text in services.items()}
