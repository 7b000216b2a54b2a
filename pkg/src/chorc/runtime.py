"""Executable semantics for both calculi and the checks built on them.

One interpreter runs the global choreography with out-of-order (delay)
semantics, the other runs the projected network with synchronous
rendezvous. Both emit the same observable labels, so bounded exhaustive
enumeration of their trace sets gives a behavioural correspondence oracle,
and exploring the network alone gives a deadlock detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

from . import cc, sp
from .cc import Label, Memory, ProcessId, Value, VarName

DEFAULT_DEPTH = 32
DEFAULT_MAX_CONFIGS = 100_000
DEFAULT_UNFOLD_BOUND = 64


class BranchTag(Enum):
    THEN = "then"
    ELSE = "else"


@dataclass(frozen=True)
class ComL:
    sender: ProcessId
    value: Value
    receiver: ProcessId
    target: VarName


@dataclass(frozen=True)
class SelL:
    chooser: ProcessId
    label: Label
    target: ProcessId


@dataclass(frozen=True)
class CondL:
    decider: ProcessId
    branch: BranchTag


TransitionLabel = Union[ComL, SelL, CondL]


@dataclass(frozen=True)
class Trace:
    labels: tuple
    completed: bool


class UnfoldLimitExceeded(Exception):
    def __init__(self, bound: int, proc: str):
        super().__init__(
            f"unfolded '{proc}' more than {bound} times without exposing an action")
        self.bound = bound
        self.proc = proc


class StateSpaceLimit(Exception):
    def __init__(self, max_configs: int):
        super().__init__(f"exceeded the exploration budget of {max_configs} configurations")
        self.max_configs = max_configs


class StuckSelection(Exception):
    """A Choose met an Offer that lacks the chosen branch: a projection bug."""

    def __init__(self, chooser: ProcessId, target: ProcessId, label: Label):
        super().__init__(
            f"'{chooser}' chose {label.value} but '{target}' does not offer it")
        self.chooser = chooser
        self.target = target
        self.label = label


# ---------------------------------------------------------------------------
# Choreography semantics


@dataclass
class ChorConfig:
    term: cc.Choreography
    mem: Memory
    defs: dict  # ProcName -> Choreography


def _chor_unfold(term, defs, bound: int):
    count = 0
    while isinstance(term, cc.Call):
        if count >= bound:
            raise UnfoldLimitExceeded(bound, term.proc)
        term = defs[term.proc]
        count += 1
    return term


def _spine(term):
    """Split a term into its chain of interactions and the final node."""
    entries = []
    node = term
    while isinstance(node, cc.Interaction):
        entries.append(node)
        node = node.cont
    return entries, node


def _rebuild(entries, tail) -> cc.Choreography:
    node = tail
    for e in reversed(entries):
        node = cc.Interaction(e.eta, e.ann, node)
    return node


def _involved(eta) -> frozenset:
    return frozenset(cc.eta_pids(eta))


def _write(mem: Memory, pid: ProcessId, var: VarName, v: Value) -> Memory:
    out = dict(mem)
    store = dict(out.get(pid, {}))
    store[var] = v
    out[pid] = store
    return out


def chor_steps(cfg: ChorConfig,
               unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> list:
    """All enabled single steps of a choreography configuration.

    An interaction in the sequential spine may fire out of order when its
    processes are disjoint from everything in front of it; the trailing
    conditional fires under the same rule with only its decider involved.
    A call at the head unfolds silently, and the delay rule never looks
    past a call that has not been unfolded yet.
    """
    term = _chor_unfold(cfg.term, cfg.defs, unfold_bound)
    entries, tail = _spine(term)
    steps = []
    blocked: set = set()
    for i, entry in enumerate(entries):
        pids = _involved(entry.eta)
        if not (pids & blocked):
            steps.append(_fire_interaction(cfg, entries, tail, i))
        blocked |= pids
    if isinstance(tail, cc.Cond) and tail.decider not in blocked:
        steps.append(_fire_cond(cfg, entries, tail))
    return steps


def _fire_interaction(cfg, entries, tail, i):
    entry = entries[i]
    rest = _rebuild(entries[:i] + entries[i + 1:], tail)
    eta = entry.eta
    if isinstance(eta, cc.Com):
        v = cc.eval_expr(eta.expr, cfg.mem.get(eta.sender, {}))
        label = ComL(eta.sender, v, eta.receiver, eta.target)
        mem = _write(cfg.mem, eta.receiver, eta.target, v)
    else:
        label = SelL(eta.chooser, eta.label, eta.target)
        mem = cfg.mem
    return (label, ChorConfig(rest, mem, cfg.defs))


def _fire_cond(cfg, entries, tail):
    taken = cc.eval_guard(tail.guard, cfg.mem.get(tail.decider, {}))
    branch = tail.then_branch if taken else tail.else_branch
    label = CondL(tail.decider, BranchTag.THEN if taken else BranchTag.ELSE)
    return (label, ChorConfig(_rebuild(entries, branch), cfg.mem, cfg.defs))


def chor_terminal(cfg: ChorConfig,
                  unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> bool:
    return isinstance(_chor_unfold(cfg.term, cfg.defs, unfold_bound), cc.End)


# ---------------------------------------------------------------------------
# Network semantics


@dataclass
class NetConfig:
    # pid -> (behaviour, local store); insertion order = network order
    procs: dict
    defs: sp.ProcDefs


def _net_normalize(cfg: NetConfig, bound: int) -> NetConfig:
    procs = dict(cfg.procs)
    changed = False
    for pid, (b, store) in procs.items():
        count = 0
        while isinstance(b, sp.Call):
            if count >= bound:
                raise UnfoldLimitExceeded(bound, b.proc)
            b = cfg.defs[(b.proc, pid)]
            count += 1
        if count:
            procs[pid] = (b, store)
            changed = True
    return NetConfig(procs, cfg.defs) if changed else cfg


def net_steps(cfg: NetConfig,
              unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> list:
    """All enabled steps: synchronous communications, matched selections,
    and local conditionals. Calls unfold silently before enabledness is
    computed."""
    cfg = _net_normalize(cfg, unfold_bound)
    steps = []
    for pid, (b, store) in cfg.procs.items():
        match b:
            case sp.Send(to, expr, _, cont):
                peer_b, peer_store = cfg.procs.get(to, (None, None))
                if isinstance(peer_b, sp.Recv) and peer_b.sender == pid:
                    v = cc.eval_expr(expr, store)
                    procs = dict(cfg.procs)
                    procs[pid] = (cont, store)
                    new_store = dict(peer_store)
                    new_store[peer_b.target] = v
                    procs[to] = (peer_b.cont, new_store)
                    steps.append((ComL(pid, v, to, peer_b.target),
                                  NetConfig(procs, cfg.defs)))
            case sp.Choose(to, label, _, cont):
                peer_b, peer_store = cfg.procs.get(to, (None, None))
                if isinstance(peer_b, sp.Offer) and peer_b.chooser == pid:
                    branch = peer_b.left if label is Label.LEFT else peer_b.right
                    if branch is None:
                        raise StuckSelection(pid, to, label)
                    procs = dict(cfg.procs)
                    procs[pid] = (cont, store)
                    procs[to] = (branch.body, peer_store)
                    steps.append((SelL(pid, label, to),
                                  NetConfig(procs, cfg.defs)))
            case sp.Cond(guard, then_branch, else_branch):
                taken = cc.eval_guard(guard, store)
                procs = dict(cfg.procs)
                procs[pid] = (then_branch if taken else else_branch, store)
                steps.append((CondL(pid, BranchTag.THEN if taken else BranchTag.ELSE),
                              NetConfig(procs, cfg.defs)))
            case _:
                pass
    return steps


def net_terminal(cfg: NetConfig,
                 unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> bool:
    cfg = _net_normalize(cfg, unfold_bound)
    return all(isinstance(b, sp.End) for b, _ in cfg.procs.values())


def net_stuck_pids(cfg: NetConfig,
                   unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> list:
    cfg = _net_normalize(cfg, unfold_bound)
    return [pid for pid, (b, _) in cfg.procs.items() if not isinstance(b, sp.End)]


# ---------------------------------------------------------------------------
# Exhaustive exploration


def enumerate_traces(start, step_fn: Callable, terminal_fn: Callable,
                     depth: int = DEFAULT_DEPTH,
                     max_configs: int = DEFAULT_MAX_CONFIGS) -> set:
    """Depth-bounded exhaustive DFS; returns the deduplicated trace set.

    A trace is completed only when its final configuration has no enabled
    steps and is terminal; depth cut-offs and stuck configurations yield
    incomplete traces.
    """
    traces: set = set()
    budget = [max_configs]

    def dfs(config, labels: tuple, remaining: int) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise StateSpaceLimit(max_configs)
        steps = step_fn(config)
        if not steps:
            traces.add(Trace(labels, completed=terminal_fn(config)))
            return
        if remaining == 0:
            traces.add(Trace(labels, completed=False))
            return
        for label, nxt in steps:
            dfs(nxt, labels + (label,), remaining - 1)

    dfs(start, (), depth)
    return traces


def chor_traces(program: cc.ChorProgram, init: Memory,
                depth: int = DEFAULT_DEPTH,
                max_configs: int = DEFAULT_MAX_CONFIGS,
                unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> set:
    cfg = ChorConfig(program.main, _copy_memory(init), program.defs_map())
    return enumerate_traces(
        cfg,
        lambda c: chor_steps(c, unfold_bound),
        lambda c: chor_terminal(c, unfold_bound),
        depth, max_configs)


def net_traces(program: sp.ProcProgram, init: Memory,
               depth: int = DEFAULT_DEPTH,
               max_configs: int = DEFAULT_MAX_CONFIGS,
               unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> set:
    cfg = net_config(program, init)
    return enumerate_traces(
        cfg,
        lambda c: net_steps(c, unfold_bound),
        lambda c: net_terminal(c, unfold_bound),
        depth, max_configs)


def net_config(program: sp.ProcProgram, init: Memory) -> NetConfig:
    procs = {pid: (b, dict(init.get(pid, {}))) for pid, b in program.network}
    return NetConfig(procs, program.defs)


def _copy_memory(init: Memory) -> Memory:
    return {pid: dict(store) for pid, store in init.items()}


# ---------------------------------------------------------------------------
# Reports


@dataclass
class EquivReport:
    equal: bool
    chor_traces: set
    net_traces: set
    missing_in_network: tuple
    missing_in_choreography: tuple


def trace_equiv(chor: cc.ChorProgram, proc: sp.ProcProgram, init: Memory,
                depth: int = DEFAULT_DEPTH,
                max_configs: int = DEFAULT_MAX_CONFIGS,
                unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> EquivReport:
    """Compare the bounded trace sets of a choreography and a network."""
    ct = chor_traces(chor, init, depth, max_configs, unfold_bound)
    nt = net_traces(proc, init, depth, max_configs, unfold_bound)
    return EquivReport(
        equal=(ct == nt),
        chor_traces=ct,
        net_traces=nt,
        missing_in_network=_sorted_traces(ct - nt),
        missing_in_choreography=_sorted_traces(nt - ct))


@dataclass
class DeadlockReport:
    deadlock_free: bool
    deadlocks: tuple  # (labels leading to the deadlock, stuck process ids)
    explored: int


def check_deadlock_freedom(proc: sp.ProcProgram, init: Memory,
                           depth: int = DEFAULT_DEPTH,
                           max_configs: int = DEFAULT_MAX_CONFIGS,
                           unfold_bound: int = DEFAULT_UNFOLD_BOUND) -> DeadlockReport:
    """Explore all reachable network configurations looking for stuck,
    non-terminal states."""
    deadlocks = []
    budget = [max_configs]
    explored = [0]

    def dfs(config, labels: tuple, remaining: int) -> None:
        budget[0] -= 1
        explored[0] += 1
        if budget[0] < 0:
            raise StateSpaceLimit(max_configs)
        steps = net_steps(config, unfold_bound)
        if not steps:
            if not net_terminal(config, unfold_bound):
                deadlocks.append((labels, tuple(net_stuck_pids(config, unfold_bound))))
            return
        if remaining == 0:
            return
        for label, nxt in steps:
            dfs(nxt, labels + (label,), remaining - 1)

    dfs(net_config(proc, init), (), depth)
    return DeadlockReport(deadlock_free=not deadlocks,
                          deadlocks=tuple(deadlocks),
                          explored=explored[0])


# ---------------------------------------------------------------------------
# Rendering (the stable text format used by the CLI)


def render_value(v: Value) -> str:
    match v:
        case cc.VInt(n):
            return f"int:{n}"
        case cc.VStr(s):
            return f"str:{s}"
        case cc.VBool(b):
            return f"bool:{'true' if b else 'false'}"
    raise TypeError(f"not a value: {v!r}")


def render_label(label: TransitionLabel) -> str:
    match label:
        case ComL(p, v, q, x):
            return f"{p} -[{render_value(v)}]-> {q}.{x}"
        case SelL(p, l, q):
            return f"{p} -[{l.value}]-> {q}"
        case CondL(p, branch):
            return f"{p} ?{branch.value}"
    raise TypeError(f"not a label: {label!r}")


def render_trace(trace: Trace, indent: str = "  ") -> str:
    status = "completed" if trace.completed else "incomplete"
    lines = [f"({status})"] if not trace.labels else \
        [render_label(l) for l in trace.labels]
    if trace.labels:
        return "\n".join(indent + l for l in lines) + f"\n{indent}-- {status}"
    return indent + lines[0]


def trace_sort_key(trace: Trace) -> tuple:
    return tuple(render_label(l) for l in trace.labels) + (trace.completed,)


def _sorted_traces(traces) -> tuple:
    return tuple(sorted(traces, key=trace_sort_key))
