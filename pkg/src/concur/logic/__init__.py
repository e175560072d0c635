"""Hoare logic and concurrent separation logic over a bounded while language."""

from .csl import (
    RACE_FREE,
    RACY,
    OwnershipVerdict,
    RaceReport,
    check_outline_csl,
    check_ownership_partition,
    detect_race,
)
from .hoare import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    Entailment,
    Obligation,
    OutlineVerdict,
    TripleVerdict,
    check_outline,
    check_triple,
    commutes,
    disjoint,
    entails,
    interference,
    semicommutes,
)
from .lang import (
    Assign,
    Call,
    Ccr,
    Either,
    If,
    Load,
    Par,
    Seq,
    Skip,
    Store,
    While,
    semaphore_p,
    semaphore_v,
    show_assertion,
    show_cmd,
)
from .parser import (
    OutlineError,
    OutlineSyntaxError,
    ProofOutline,
    parse_assertion,
    parse_command,
    parse_expr,
    parse_outline,
)
from .semantics import EvalResult, eval
from .state import Domains, MachineState, footprints, sat

__all__ = [
    "FAIL",
    "INCONCLUSIVE",
    "PASS",
    "RACE_FREE",
    "RACY",
    "Assign",
    "Call",
    "Ccr",
    "Domains",
    "Either",
    "Entailment",
    "EvalResult",
    "If",
    "Load",
    "MachineState",
    "Obligation",
    "OutlineError",
    "OutlineSyntaxError",
    "OutlineVerdict",
    "OwnershipVerdict",
    "Par",
    "ProofOutline",
    "RaceReport",
    "Seq",
    "Skip",
    "Store",
    "TripleVerdict",
    "While",
    "check_outline",
    "check_outline_csl",
    "check_ownership_partition",
    "check_triple",
    "commutes",
    "detect_race",
    "disjoint",
    "entails",
    "eval",
    "footprints",
    "interference",
    "parse_assertion",
    "parse_command",
    "parse_expr",
    "parse_outline",
    "sat",
    "semaphore_p",
    "semaphore_v",
    "semicommutes",
    "show_assertion",
    "show_cmd",
]
