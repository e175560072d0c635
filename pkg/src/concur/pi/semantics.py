"""Early-style labelled transition semantics with scope extrusion.

Transitions are computed structurally over a term whose binders have been
made globally distinct (and distinct from the input universe), so
instantiating an input or closing an extruded scope never captures.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

from .terms import (
    AgentDef,
    Call,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    Process,
    Restrict,
    Sum,
    Tau,
    UnboundAgentError,
    UnguardedRecursionError,
    canonical_key,
    distinct_binders,
    free_names,
    fresh,
    substitute,
)

DEFAULT_UNFOLD_DEPTH = 64
FRESH_BASE = Name("w")


@dataclass(frozen=True, order=True)
class TauAct:
    def __str__(self) -> str:
        return "tau"


@dataclass(frozen=True, order=True)
class FreeOutput:
    chan: Name
    payload: Name | None

    def __str__(self) -> str:
        return f"{self.chan}<{'' if self.payload is None else self.payload}>"


@dataclass(frozen=True, order=True)
class BoundOutput:
    chan: Name
    fresh: Name

    def __str__(self) -> str:
        return f"{self.chan}<(new {self.fresh})>"


@dataclass(frozen=True, order=True)
class InputAct:
    chan: Name
    received: Name | None

    def __str__(self) -> str:
        return f"{self.chan}({'' if self.received is None else self.received})"


Action = TauAct | FreeOutput | BoundOutput | InputAct
TAU = TauAct()


@dataclass(frozen=True)
class Transition:
    source: Process
    action: Action
    target: Process


# Internal commitments.  Inputs carry an instantiation function.
@dataclass
class _Out:
    chan: Name
    payload: Name | None
    target: Process
    bound: bool = False


@dataclass
class _In:
    chan: Name
    arity: int
    inst: Callable[[Name | None], Process]


class _Ctx:
    def __init__(self, defs: Mapping[str, AgentDef], used: set[Name], max_depth: int):
        self.defs = defs
        self.used = used
        self.max_depth = max_depth

    def unfold(self, call: Call) -> Process:
        d = self.defs.get(call.agent)
        if d is None:
            raise UnboundAgentError(f"call to undefined agent {call.agent}")
        if len(d.params) != len(call.args):
            raise UnboundAgentError(f"{call.agent} expects {len(d.params)} argument(s)")
        body = substitute(d.body, dict(zip(d.params, call.args)))
        return distinct_binders(body, self.used)


def _commitments(p: Process, ctx: _Ctx, depth: int = 0) -> tuple[list[Process], list[_Out], list[_In]]:
    taus: list[Process] = []
    outs: list[_Out] = []
    ins: list[_In] = []
    match p:
        case Nil():
            pass
        case Tau(k):
            taus.append(k)
        case Output(c, y, k):
            outs.append(_Out(c, y, k))
        case Input(c, None, k):
            ins.append(_In(c, 0, lambda _n, k=k: k))
        case Input(c, x, k):
            ins.append(_In(c, 1, lambda n, x=x, k=k: substitute(k, {x: n})))
        case Sum(l, r):
            for part in (l, r):
                t, o, i = _commitments(part, ctx, depth)
                taus += t
                outs += o
                ins += i
        case Match(a, b, k):
            if a == b:
                return _commitments(k, ctx, depth)
        case Call():
            if depth >= ctx.max_depth:
                raise UnguardedRecursionError(
                    f"unfolding {p.agent} exceeded depth bound {ctx.max_depth}"
                )
            return _commitments(ctx.unfold(p), ctx, depth + 1)
        case Restrict(x, k):
            t, o, i = _commitments(k, ctx, depth)
            taus += [Restrict(x, tgt) for tgt in t]
            for out in o:
                if out.chan == x:
                    continue
                if out.payload == x and not out.bound:
                    outs.append(_Out(out.chan, x, out.target, bound=True))
                else:
                    outs.append(_Out(out.chan, out.payload, Restrict(x, out.target), out.bound))
            for inp in i:
                if inp.chan == x:
                    continue
                ins.append(_In(inp.chan, inp.arity, lambda n, f=inp.inst, x=x: Restrict(x, f(n))))
        case Par(l, r):
            lt, lo, li = _commitments(l, ctx, depth)
            rt, ro, ri = _commitments(r, ctx, depth)
            taus += [Par(t, r) for t in lt] + [Par(l, t) for t in rt]
            outs += [_Out(o.chan, o.payload, Par(o.target, r), o.bound) for o in lo]
            outs += [_Out(o.chan, o.payload, Par(l, o.target), o.bound) for o in ro]
            ins += [_In(i.chan, i.arity, lambda n, f=i.inst: Par(f(n), r)) for i in li]
            ins += [_In(i.chan, i.arity, lambda n, f=i.inst: Par(l, f(n))) for i in ri]
            for outs_side, ins_side, out_left in ((lo, ri, True), (ro, li, False)):
                for o in outs_side:
                    for i in ins_side:
                        if o.chan != i.chan or (o.payload is None) != (i.arity == 0):
                            continue
                        received = i.inst(o.payload)
                        pair = Par(o.target, received) if out_left else Par(received, o.target)
                        taus.append(Restrict(o.payload, pair) if o.bound else pair)
        case _:
            raise TypeError(f"not a process: {p!r}")
    return taus, outs, ins


def fresh_input_name(universe: Iterable[Name]) -> Name:
    """The canonical fresh name offered to inputs beyond the universe."""
    return fresh(FRESH_BASE, universe)


def _dedupe(trans: list[Transition]) -> list[Transition]:
    seen = set()
    out = []
    for t in trans:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def transitions(
    p: Process,
    defs: Mapping[str, AgentDef],
    input_universe: Iterable[Name] = (),
    *,
    max_depth: int = DEFAULT_UNFOLD_DEPTH,
) -> list[Transition]:
    """All early transitions of ``p``.

    Inputs are instantiated with every name of ``input_universe`` plus one
    canonical fresh name.
    """
    universe = set(input_universe)
    new = fresh_input_name(universe | free_names(p))
    universe.add(new)
    used = set(universe) | free_names(p)
    src = distinct_binders(p, used)
    ctx = _Ctx(defs, used, max_depth)
    taus, outs, ins = _commitments(src, ctx)
    result = [Transition(p, TAU, t) for t in taus]
    for o in outs:
        act = BoundOutput(o.chan, o.payload) if o.bound else FreeOutput(o.chan, o.payload)
        result.append(Transition(p, act, o.target))
    for i in ins:
        if i.arity == 0:
            result.append(Transition(p, InputAct(i.chan, None), i.inst(None)))
        else:
            for n in sorted(universe):
                result.append(Transition(p, InputAct(i.chan, n), i.inst(n)))
    return _dedupe(result)


def tau_successors(p: Process, defs: Mapping[str, AgentDef], *, max_depth: int = DEFAULT_UNFOLD_DEPTH) -> list[Process]:
    used = set(free_names(p))
    src = distinct_binders(p, used)
    taus, _, _ = _commitments(src, _Ctx(defs, used, max_depth))
    return taus


def reduce_step(p: Process, defs: Mapping[str, AgentDef]) -> list[Process]:
    """Targets of the tau transitions of ``p``, one per alpha-class."""
    out, seen = [], set()
    for t in tau_successors(p, defs):
        key = canonical_key(t)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


@dataclass
class Trace:
    steps: list[Transition] = field(default_factory=list)
    status: str = "terminated"  # or "budget-exhausted"

    @property
    def final(self) -> Process | None:
        return self.steps[-1].target if self.steps else None


def run_trace(p: Process, defs: Mapping[str, AgentDef], scheduler_seed: int = 0, max_steps: int = 1000) -> Trace:
    """Follow seeded random tau steps until none is enabled or the budget runs out."""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    rng = random.Random(scheduler_seed)
    trace = Trace()
    current = p
    for _ in range(max_steps):
        succ = reduce_step(current, defs)
        if not succ:
            return trace
        nxt = succ[rng.randrange(len(succ))]
        trace.steps.append(Transition(current, TAU, nxt))
        current = nxt
    if reduce_step(current, defs):
        trace.status = "budget-exhausted"
    return trace


@dataclass
class ReductionGraph:
    states: list[Process]
    edges: dict[int, list[int]]
    truncated: bool = False

    def terminals(self) -> list[int]:
        return [i for i in range(len(self.states)) if not self.edges.get(i)]

    def maximal_paths(self, limit: int = 1000) -> list[list[int]]:
        paths: list[list[int]] = []

        def go(path: list[int]) -> None:
            if len(paths) >= limit:
                return
            nxt = [j for j in self.edges.get(path[-1], []) if j not in path]
            if not nxt:
                paths.append(path)
                return
            for j in nxt:
                go(path + [j])

        go([0])
        return paths


def explore_reductions(p: Process, defs: Mapping[str, AgentDef], max_states: int = 10000) -> ReductionGraph:
    """Exhaustive reduction graph of ``p``, states identified up to alpha."""
    index = {canonical_key(p): 0}
    states = [p]
    edges: dict[int, list[int]] = {}
    todo = [0]
    truncated = False
    while todo:
        i = todo.pop(0)
        targets = []
        for q in reduce_step(states[i], defs):
            key = canonical_key(q)
            if key not in index:
                if len(states) >= max_states:
                    truncated = True
                    continue
                index[key] = len(states)
                states.append(q)
                todo.append(index[key])
            targets.append(index[key])
        edges[i] = targets
    return ReductionGraph(states, edges, truncated)
