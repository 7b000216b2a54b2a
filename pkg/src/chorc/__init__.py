"""Choreography compiler: write a global protocol once, project it to one
behaviour per process, check the projection by exhaustive simulation, and
emit runnable service code."""

from . import cc, codegen, epp, ir_json, parser, runtime, sp
from .cc import (ChorProgram, Label, Memory, eval_expr, process_set,
                 validate_program)
from .codegen import CodegenConfig, assign_operation_names, compile_program, emit_service
from .epp import MergeError, ProjectionError, epp as project, merge, project_behaviour
from .ir_json import dump_ir, load_ir
from .parser import ParsedProgram, ParseFailure, parse, pretty_print
from .runtime import (DeadlockReport, EquivReport, Trace, check_deadlock_freedom,
                      chor_steps, enumerate_traces, net_steps, trace_equiv)
from .sp import ProcProgram, behaviour_equal, validate_proc_program

__all__ = [
    "cc", "sp", "epp", "runtime", "codegen", "parser", "ir_json",
    "ChorProgram", "Label", "Memory", "eval_expr", "process_set",
    "validate_program", "CodegenConfig", "assign_operation_names",
    "compile_program", "emit_service", "MergeError", "ProjectionError",
    "project", "merge", "project_behaviour", "dump_ir", "load_ir",
    "ParsedProgram", "ParseFailure", "parse", "pretty_print",
    "DeadlockReport", "EquivReport", "Trace", "check_deadlock_freedom",
    "chor_steps", "enumerate_traces", "net_steps", "trace_equiv",
    "ProcProgram", "behaviour_equal", "validate_proc_program",
]

__version__ = "0.1.0"
