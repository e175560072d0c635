"""Whole programs: agent environments and load-time well-formedness checks."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .terms import (
    AgentDef,
    ArityError,
    Call,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    PiError,
    Process,
    Restrict,
    Sum,
    Tau,
    UnboundAgentError,
    UnguardedRecursionError,
    free_names,
)

# Boolean constants; free in the standard agents by design.
TRUE = Name("T")
FALSE = Name("F")
RESERVED_NAMES = frozenset({TRUE, FALSE})


@dataclass(frozen=True)
class PiProgram:
    defs: Mapping[str, AgentDef]
    main: Process
    user_defs: tuple[str, ...] = field(default=())


def calls(p: Process, guarded: bool = False) -> list[tuple[Call, bool]]:
    """Every ``Call`` in ``p`` paired with whether it sits under a prefix."""
    match p:
        case Nil():
            return []
        case Call():
            return [(p, guarded)]
        case Sum(l, r) | Par(l, r):
            return calls(l, guarded) + calls(r, guarded)
        case Output(_, _, k) | Input(_, _, k) | Tau(k):
            return calls(k, True)
        case Restrict(_, k) | Match(_, _, k):
            return calls(k, guarded)
    raise TypeError(f"not a process: {p!r}")


def _channel_arities(p: Process, where: str, seen: dict[str, int]) -> None:
    match p:
        case Output(c, y, k):
            _note_arity(c, 0 if y is None else 1, where, seen)
            _channel_arities(k, where, seen)
        case Input(c, x, k):
            _note_arity(c, 0 if x is None else 1, where, seen)
            _channel_arities(k, where, seen)
        case Sum(l, r) | Par(l, r):
            _channel_arities(l, where, seen)
            _channel_arities(r, where, seen)
        case Tau(k) | Restrict(_, k) | Match(_, _, k):
            _channel_arities(k, where, seen)


def _note_arity(c: Name, arity: int, where: str, seen: dict[str, int]) -> None:
    key = str(c)
    if seen.setdefault(key, arity) != arity:
        raise ArityError(f"channel {key} used with arity {seen[key]} and {arity} in {where}")


def check_program(defs: Mapping[str, AgentDef], main: Process) -> None:
    """Raise a ``PiError`` unless the program is well formed.

    Checks: calls refer to defined agents with matching arity, definitions
    are closed (modulo the reserved constants), each channel identifier is
    used at a single arity within one body, and recursion is guarded.
    """
    bodies = {d.id: d.body for d in defs.values()}
    for d in defs.values():
        if len(set(d.params)) != len(d.params):
            raise PiError(f"agent {d.id}: parameters are not distinct")
        extra = free_names(d.body) - set(d.params) - RESERVED_NAMES
        if extra:
            names = ", ".join(sorted(str(n) for n in extra))
            raise PiError(f"agent {d.id}: body has free names not among its parameters: {names}")
    for where, body in [("main", main), *((f"agent {k}", v) for k, v in bodies.items())]:
        for call, _ in calls(body):
            target = defs.get(call.agent)
            if target is None:
                raise UnboundAgentError(f"{where}: call to undefined agent {call.agent}")
            if len(call.args) != len(target.params):
                raise ArityError(
                    f"{where}: {call.agent} expects {len(target.params)} argument(s), got {len(call.args)}"
                )
        _channel_arities(body, where, {})

    # Unguarded call graph must be acyclic.
    graph = {k: {c.agent for c, g in calls(v) if not g} for k, v in bodies.items()}
    state: dict[str, int] = {}

    def visit(a: str, path: list[str]) -> None:
        state[a] = 1
        for b in sorted(graph.get(a, ())):
            if state.get(b) == 1:
                cycle = " -> ".join(path[path.index(b):] + [b]) if b in path else f"{a} -> {b}"
                raise UnguardedRecursionError(f"unguarded recursion: {cycle}")
            if b not in state:
                visit(b, path + [b])
        state[a] = 2

    for a in sorted(graph):
        if a not in state:
            visit(a, [a])
