"""Built-in agents: executor, copier and the And gate over booleans T/F."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from .program import FALSE, TRUE
from .semantics import FreeOutput, explore_reductions, transitions
from .terms import (
    NIL,
    AgentDef,
    Call,
    Input,
    Match,
    Name,
    Output,
    Par,
    Process,
    Restrict,
    Sum,
)

STD_IDS = ("Exec", "Copy", "And")

_x, _y, _z, _out = Name("x"), Name("y"), Name("z"), Name("out")


def stdlib() -> list[AgentDef]:
    # And's false branch outputs on `out`; written on an unbound `z` it
    # would leave the definition open.
    exec_def = AgentDef("Exec", (_x,), Input(_x, _y, Output(_y, None, NIL)))
    copy_def = AgentDef(
        "Copy",
        (_y, _z),
        Sum(Match(_y, TRUE, Output(_z, TRUE, NIL)), Match(_y, FALSE, Output(_z, FALSE, NIL))),
    )
    and_def = AgentDef(
        "And",
        (_x, _y, _out),
        Sum(Match(_x, TRUE, Call("Copy", (_y, _out))), Match(_x, FALSE, Output(_out, FALSE, NIL))),
    )
    return [exec_def, copy_def, and_def]


def std_env() -> dict[str, AgentDef]:
    return {d.id: d for d in stdlib()}


def case(selector: Name, branches: Mapping[Name, Process]) -> Process:
    """``y:[T => P, F => Q]`` as the sum of matches it abbreviates."""
    items = [Match(selector, v, p) for v, p in branches.items()]
    out = items[0]
    for m in items[1:]:
        out = Sum(out, m)
    return out


class NonConfluentError(Exception):
    pass


RESULT = Name("res")


def gate_scenario(gate: str, args: tuple[Name, ...]) -> Process:
    """``(new out)(gate(args, out) | out(v).res<v>.0)``."""
    reader = Input(_out, Name("v"), Output(RESULT, Name("v"), NIL))
    return Restrict(_out, Par(Call(gate, (*args, _out)), reader))


def delivered(p: Process, defs: Mapping[str, AgentDef], chan: Name = RESULT) -> set[Name]:
    """Values ``p`` is ready to emit on ``chan``."""
    return {
        t.action.payload
        for t in transitions(p, defs)
        if isinstance(t.action, FreeOutput) and t.action.chan == chan
    }


def run_to_value(p: Process, defs: Mapping[str, AgentDef], chan: Name = RESULT, max_states: int = 10000) -> Name:
    """Exhaust all reductions of a closed scenario; every terminal state
    must offer the same single value on ``chan``."""
    graph = explore_reductions(p, defs, max_states)
    if graph.truncated:
        raise NonConfluentError("reduction graph exceeds the state bound")
    values: set[Name] = set()
    for i in graph.terminals():
        got = delivered(graph.states[i], defs, chan)
        if len(got) != 1:
            raise NonConfluentError(f"terminal state offers {len(got)} value(s) on {chan}")
        values |= got
    if len(values) != 1:
        raise NonConfluentError(f"runs deliver different values: {sorted(map(str, values))}")
    return values.pop()


@dataclass(frozen=True)
class TruthRow:
    x: Name
    y: Name
    result: Name


def truth_table(gate: str = "And", defs: Mapping[str, AgentDef] | None = None) -> list[TruthRow]:
    defs = std_env() if defs is None else defs
    rows = []
    for a in (TRUE, FALSE):
        for b in (TRUE, FALSE):
            rows.append(TruthRow(a, b, run_to_value(gate_scenario(gate, (a, b)), defs)))
    return rows
