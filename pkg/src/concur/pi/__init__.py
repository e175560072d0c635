"""The pi-calculus: terms, syntax, transitions, bisimilarity, standard agents."""

from .bisim import BisimVerdict, bisimilar, law_suite, mutation_suite
from .encodings import stdlib, truth_table
from .parser import parse_process, parse_program, print_process
from .program import PiProgram
from .semantics import (
    TAU,
    BoundOutput,
    FreeOutput,
    InputAct,
    Trace,
    Transition,
    reduce_step,
    run_trace,
    transitions,
)
from .terms import (
    AgentDef,
    Call,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    Restrict,
    Sum,
    Tau,
    alpha_eq,
    free_names,
    substitute,
)
from .witness import verify_witness

__all__ = [
    "TAU",
    "AgentDef",
    "BisimVerdict",
    "BoundOutput",
    "Call",
    "FreeOutput",
    "Input",
    "InputAct",
    "Match",
    "Name",
    "Nil",
    "Output",
    "Par",
    "PiProgram",
    "Restrict",
    "Sum",
    "Tau",
    "Trace",
    "Transition",
    "alpha_eq",
    "bisimilar",
    "free_names",
    "law_suite",
    "mutation_suite",
    "parse_process",
    "parse_program",
    "print_process",
    "reduce_step",
    "run_trace",
    "stdlib",
    "substitute",
    "transitions",
    "truth_table",
    "verify_witness",
]
