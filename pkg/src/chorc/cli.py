"""Command-line driver for the whole pipeline.

Exit codes: 0 success, 1 parse/validation failure, 2 projection failure,
3 runtime or verification failure, 4 an internal exploration limit was hit.
Diagnostics go to stderr; data output goes to stdout or the requested
output path.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path as FsPath

from . import cc, codegen, epp, ir_json, parser, runtime, sp

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_PROJECTION = 2
EXIT_RUNTIME = 3
EXIT_LIMIT = 4


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_mem_item(text: str):
    # Pid.var=kind:value with kind one of int, str, bool.
    head, sep, raw = text.partition("=")
    if not sep or "." not in head:
        raise argparse.ArgumentTypeError(
            f"bad memory binding {text!r}, expected Pid.var=kind:value")
    pid, _, var = head.partition(".")
    kind, sep2, payload = raw.partition(":")
    if not sep2:
        raise argparse.ArgumentTypeError(
            f"bad memory value {raw!r}, expected int:N, str:S or bool:B")
    if kind == "int":
        try:
            value = cc.VInt(int(payload))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer {payload!r}")
    elif kind == "str":
        value = cc.VStr(payload)
    elif kind == "bool":
        if payload not in ("true", "false"):
            raise argparse.ArgumentTypeError(f"bad boolean {payload!r}")
        value = cc.VBool(payload == "true")
    else:
        raise argparse.ArgumentTypeError(f"unknown value kind {kind!r}")
    return pid, var, value


def _build_memory(items) -> cc.Memory:
    mem: cc.Memory = {}
    for pid, var, value in items or []:
        mem.setdefault(pid, {})[var] = value
    return mem


def _load_parsed(path: str):
    try:
        source = FsPath(path).read_text(encoding="utf-8")
    except OSError as e:
        _err(f"cannot read {path}: {e}")
        return None
    try:
        parsed = parser.parse(source, filename=path)
    except parser.ParseFailure as e:
        for err in e.errors:
            _err(str(err))
        return None
    errors = cc.validate_program(parsed.program)
    if errors:
        for err in errors:
            span = parsed.span_of(err.owner, err.path)
            prefix = f"{span}: " if span else ""
            _err(f"{prefix}{err.kind}: {err.detail}")
        return None
    return parsed


def _project(parsed):
    try:
        return epp.epp(parsed.program)
    except epp.ProjectionError as e:
        span = parsed.span_of(e.owner, e.path)
        prefix = f"{span}: " if span else ""
        _err(f"{prefix}{e.kind} while projecting process '{e.pid}': {e.detail}")
        return None


def _print_traces(traces, exhaustive: bool) -> None:
    ordered = sorted(traces, key=runtime.trace_sort_key) if exhaustive else list(traces)
    for i, trace in enumerate(ordered, start=1):
        status = "completed" if trace.completed else "incomplete"
        print(f"trace {i} ({status}):")
        for label in trace.labels:
            print(f"  {runtime.render_label(label)}")


def _random_walk(start, step_fn, terminal_fn, depth: int, rng) -> runtime.Trace:
    labels = []
    config = start
    for _ in range(depth):
        steps = step_fn(config)
        if not steps:
            break
        label, config = rng.choice(steps)
        labels.append(label)
    steps = step_fn(config)
    return runtime.Trace(tuple(labels), completed=not steps and terminal_fn(config))


def cmd_check(args) -> int:
    parsed = _load_parsed(args.file)
    return EXIT_OK if parsed is not None else EXIT_PARSE


def cmd_project(args) -> int:
    parsed = _load_parsed(args.file)
    if parsed is None:
        return EXIT_PARSE
    proc = _project(parsed)
    if proc is None:
        return EXIT_PROJECTION
    text = ir_json.dump_ir(proc)
    if args.ir_out:
        FsPath(args.ir_out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def _run_common(args, use_network: bool) -> int:
    parsed = _load_parsed(args.file)
    if parsed is None:
        return EXIT_PARSE
    mem = _build_memory(args.mem)
    if use_network:
        proc = _project(parsed)
        if proc is None:
            return EXIT_PROJECTION
        start = runtime.net_config(proc, mem)
        step_fn = runtime.net_steps
        terminal_fn = runtime.net_terminal
    else:
        cfg = runtime.ChorConfig(parsed.program.main, mem,
                                 parsed.program.defs_map())
        start = cfg
        step_fn = runtime.chor_steps
        terminal_fn = runtime.chor_terminal
    try:
        if args.seed is not None:
            rng = random.Random(args.seed)
            trace = _random_walk(start, step_fn, terminal_fn, args.depth, rng)
            _print_traces([trace], exhaustive=False)
        else:
            traces = runtime.enumerate_traces(start, step_fn, terminal_fn,
                                              depth=args.depth,
                                              max_configs=args.max_configs)
            _print_traces(traces, exhaustive=True)
    except (runtime.UnfoldLimitExceeded, runtime.StateSpaceLimit) as e:
        _err(str(e))
        return EXIT_LIMIT
    except (cc.EvalError, runtime.StuckSelection) as e:
        _err(str(e))
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_run(args) -> int:
    return _run_common(args, use_network=False)


def cmd_simulate(args) -> int:
    return _run_common(args, use_network=True)


def cmd_verify(args) -> int:
    parsed = _load_parsed(args.file)
    if parsed is None:
        return EXIT_PARSE
    proc = _project(parsed)
    if proc is None:
        return EXIT_PROJECTION
    mem = _build_memory(args.mem)
    try:
        report = runtime.trace_equiv(parsed.program, proc, mem,
                                     depth=args.depth,
                                     max_configs=args.max_configs)
        deadlock = runtime.check_deadlock_freedom(proc, mem,
                                                  depth=args.depth,
                                                  max_configs=args.max_configs)
    except (runtime.UnfoldLimitExceeded, runtime.StateSpaceLimit) as e:
        _err(str(e))
        return EXIT_LIMIT
    except (cc.EvalError, runtime.StuckSelection) as e:
        _err(str(e))
        return EXIT_RUNTIME
    ok = True
    if report.equal:
        completed = sum(1 for t in report.chor_traces if t.completed)
        incomplete = len(report.chor_traces) - completed
        note = f", {incomplete} incomplete" if incomplete else ""
        print(f"traces equal: {completed} completed{note}")
    else:
        ok = False
        print("traces differ")
        print(f"missing in network ({len(report.missing_in_network)}):")
        for trace in report.missing_in_network:
            print(runtime.render_trace(trace))
        print(f"missing in choreography ({len(report.missing_in_choreography)}):")
        for trace in report.missing_in_choreography:
            print(runtime.render_trace(trace))
    if deadlock.deadlock_free:
        print(f"deadlock-free: yes ({deadlock.explored} configurations explored)")
    else:
        ok = False
        print(f"deadlock-free: no ({len(deadlock.deadlocks)} deadlocked runs)")
        labels, stuck = deadlock.deadlocks[0]
        print(f"deadlock after {len(labels)} steps:")
        for label in labels:
            print(f"  {runtime.render_label(label)}")
        print(f"stuck processes: {', '.join(stuck)}")
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_compile(args) -> int:
    parsed = _load_parsed(args.file)
    if parsed is None:
        return EXIT_PARSE
    proc = _project(parsed)
    if proc is None:
        return EXIT_PROJECTION
    cfg = codegen.CodegenConfig(
        base_port=args.base_port,
        out_layout="single-file" if args.single_file else "file-per-service")
    try:
        services = codegen.compile_program(proc, cfg)
    except codegen.CodegenError as e:
        _err(str(e))
        return EXIT_RUNTIME
    out_dir = FsPath(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for filename, text in codegen.output_files(services, cfg).items():
        target = out_dir / filename
        target.write_text(text, encoding="utf-8", newline="\n")
        print(str(target))
    return EXIT_OK


def _add_run_args(p, with_seed: bool = True) -> None:
    p.add_argument("--mem", action="append", type=_parse_mem_item, default=[],
                   metavar="Pid.var=kind:value",
                   help="initial memory binding (repeatable)")
    p.add_argument("--depth", type=int, default=runtime.DEFAULT_DEPTH)
    p.add_argument("--max-configs", type=int, default=runtime.DEFAULT_MAX_CONFIGS)
    if with_seed:
        group = p.add_mutually_exclusive_group()
        group.add_argument("--seed", type=int, default=None,
                           help="follow one random path with this seed")
        group.add_argument("--exhaustive", action="store_true",
                           help="enumerate all interleavings (the default)")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chorc",
        description="Compile, simulate and verify choreographies.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a choreography")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("project", help="project to the process IR")
    p.add_argument("file")
    p.add_argument("--ir-out", default=None)
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("run", help="interpret the choreography")
    p.add_argument("file")
    _add_run_args(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("simulate", help="interpret the projected network")
    p.add_argument("file")
    _add_run_args(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("verify",
                       help="check trace equivalence and deadlock freedom")
    p.add_argument("file")
    _add_run_args(p, with_seed=False)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("compile", help="generate service source code")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.add_argument("--single-file", action="store_true")
    p.add_argument("--base-port", type=int, default=9000)
    p.set_defaults(fn=cmd_compile)

    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.fn(args)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
