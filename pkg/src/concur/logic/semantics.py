"""Small-step interleaving semantics over bounded states.

A configuration is a residual command (``None`` once finished) paired with
a machine state.  One step executes one unit: an assignment, skip, heap
load or store, a guard evaluation, a whole critical region whose guard
holds, or an assumed call.  Exploration is a breadth-first search over
distinct configurations; ``fuel`` bounds how many may be visited.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from .lang import (
    Assign,
    Call,
    Ccr,
    Command,
    Either,
    If,
    Load,
    Par,
    Seq,
    Skip,
    Store,
    While,
    assertion_vars,
    cmd_vars,
    expr_vars,
    show_assertion,
    show_cmd,
)
from .state import (
    DEFAULT_DOMAIN,
    DEFAULT_FUEL,
    Domains,
    EvalError,
    MachineState,
    eval_expr,
    footprints,
    holds,
)


@dataclass(frozen=True)
class Done:
    """A finished branch of a parallel composition."""


DONE = Done()


@dataclass(frozen=True)
class Unit:
    """What one step did: a label plus the locations it read and wrote.

    Locations are ``("var", name)`` or ``("heap", address)``.  ``region`` is
    the resource of the enclosing critical region, if any.
    """

    label: str
    thread: tuple[str, ...] = ()
    reads: frozenset = frozenset()
    writes: frozenset = frozenset()
    region: str | None = None

    def __str__(self) -> str:
        who = "/".join(self.thread) or "main"
        return f"[{who}] {self.label}"


@dataclass(frozen=True)
class Fault:
    message: str


@dataclass(frozen=True)
class Step:
    unit: Unit
    residual: Command | None
    outcome: MachineState | Fault


@dataclass
class Env:
    """Everything the step function needs besides the command and state."""

    domains: Domains
    assumed: Mapping = field(default_factory=dict)
    fuel: int = DEFAULT_FUEL
    cache: dict = field(default_factory=dict, repr=False)


class Inconclusive(Exception):
    def __init__(self, explored: int):
        super().__init__(f"fuel exhausted after {explored} configurations")
        self.explored = explored


def _vars(names) -> frozenset:
    return frozenset(("var", x) for x in names)


def steps(c: Command, st: MachineState, env: Env, thread: tuple[str, ...] = ()) -> Iterator[Step]:
    """Every step the residual command ``c`` can take from ``st``."""
    match c:
        case Skip():
            yield Step(Unit("skip", thread), None, st)
        case Assign(x, e):
            unit = Unit(show_cmd(c), thread, _vars(expr_vars(e)), _vars({x}))
            try:
                v = env.domains.wrap_var(x, eval_expr(e, st.s))
                yield Step(unit, None, st.set_var(x, v))
            except EvalError as err:
                yield Step(unit, None, Fault(f"{show_cmd(c)}: {err}"))
        case Load(x, a):
            try:
                addr = eval_expr(a, st.s)
            except EvalError as err:
                yield Step(Unit(show_cmd(c), thread), None, Fault(f"{show_cmd(c)}: {err}"))
                return
            unit = Unit(show_cmd(c), thread, _vars(expr_vars(a)) | {("heap", addr)}, _vars({x}))
            h = st.h
            if addr not in h:
                yield Step(unit, None, Fault(f"{show_cmd(c)}: address {addr} not allocated"))
            else:
                yield Step(unit, None, st.set_var(x, env.domains.wrap_var(x, h[addr])))
        case Store(a, e):
            try:
                addr, v = eval_expr(a, st.s), eval_expr(e, st.s)
            except EvalError as err:
                yield Step(Unit(show_cmd(c), thread), None, Fault(f"{show_cmd(c)}: {err}"))
                return
            unit = Unit(show_cmd(c), thread, _vars(expr_vars(a) | expr_vars(e)), frozenset({("heap", addr)}))
            if addr not in st.h:
                yield Step(unit, None, Fault(f"{show_cmd(c)}: address {addr} not allocated"))
            else:
                yield Step(unit, None, st.set_cell(addr, env.domains.wrap_cell(v)))
        case Seq(items):
            if not items:
                yield Step(Unit("skip", thread), None, st)
                return
            head, rest = items[0], items[1:]
            for sp in steps(head, st, env, thread):
                if sp.residual is None:
                    nxt = Seq(rest, meta=c.meta) if rest else None
                else:
                    nxt = Seq((sp.residual, *rest), meta=c.meta)
                yield Step(sp.unit, nxt, sp.outcome)
        case If(b, t, e):
            unit = Unit(f"test {show_assertion(b)}", thread, _vars(assertion_vars(b)))
            yield Step(unit, t if holds(b, st.s, {}) else e, st)
        case While(b, body, _):
            unit = Unit(f"test {show_assertion(b)}", thread, _vars(assertion_vars(b)))
            if holds(b, st.s, {}):
                yield Step(unit, Seq((body, c)), st)
            else:
                yield Step(unit, None, st)
        case Par(l, r):
            for side, branch in (("L", l), ("R", r)):
                if branch is DONE:
                    continue
                for sp in steps(branch, st, env, (*thread, side)):
                    nb = DONE if sp.residual is None else sp.residual
                    nl, nr = (nb, r) if side == "L" else (l, nb)
                    nxt = None if nl is DONE and nr is DONE else Par(nl, nr, meta=c.meta)
                    yield Step(sp.unit, nxt, sp.outcome)
        case Either(l, r):
            for side, branch in (("L", l), ("R", r)):
                for sp in steps(branch, st, env, (*thread, side)):
                    if sp.residual is None:
                        nxt = None
                    else:
                        nxt = Either(sp.residual, r, meta=c.meta) if side == "L" else Either(l, sp.residual, meta=c.meta)
                    yield Step(sp.unit, nxt, sp.outcome)
        case Ccr(_, g, _):
            if not holds(g, st.s, {}):
                return
            yield from _region(c, st, env, thread)
        case Call():
            yield from _call(c, st, env, thread)
        case _:
            raise TypeError(f"not a command: {c!r}")


def _region(c: Ccr, st: MachineState, env: Env, thread) -> Iterator[Step]:
    """Run a critical region's body to completion as one unit."""
    label = show_cmd(c)
    reads = _vars(assertion_vars(c.guard))
    outcomes: dict = {}
    queue = deque([(c.body, st, reads, frozenset())])
    seen = set()
    while queue:
        cmd, s, rd, wr = queue.popleft()
        if cmd is None:
            outcomes.setdefault((s, rd, wr), None)
            continue
        if (cmd, s, rd, wr) in seen:
            continue
        seen.add((cmd, s, rd, wr))
        if len(seen) > env.fuel:
            raise Inconclusive(len(seen))
        for sp in steps(cmd, s, env, thread):
            if isinstance(sp.outcome, Fault):
                yield Step(Unit(label, thread, rd | sp.unit.reads, wr | sp.unit.writes, c.resource), None, sp.outcome)
                continue
            queue.append((sp.residual, sp.outcome, rd | sp.unit.reads, wr | sp.unit.writes))
    for s, rd, wr in outcomes:
        yield Step(Unit(label, thread, rd, wr, c.resource), None, s)


def _call(c: Call, st: MachineState, env: Env, thread) -> Iterator[Step]:
    """An assumed triple as a specification statement.

    The call claims the unique part of the heap satisfying its precondition
    and replaces it by any heap disjoint from the rest that satisfies the
    postcondition; the rest of the heap and all variables are untouched.
    """
    triple = env.assumed[c.name]
    label = show_cmd(c)
    fkey = ("foot", c.name, st)
    if fkey not in env.cache:
        env.cache[fkey] = footprints(triple.pre, st)
    feet = env.cache[fkey]
    if len(feet) != 1:
        why = "does not hold" if not feet else "has no unique footprint"
        yield Step(Unit(label, thread), None, Fault(f"{label}: precondition {why}"))
        return
    foot = feet[0]
    frame = {a: v for a, v in st.h.items() if a not in foot}
    touched = frozenset(("heap", a) for a in foot)
    free_cells = tuple(a for a in env.domains.heap_addrs if a not in frame)
    key = ("post", c.name, st.store, free_cells)
    if key not in env.cache:
        sub = Domains({}, free_cells, env.domains.heap_values)
        env.cache[key] = [h for h in sub.heaps() if holds(triple.post, st.s, h)]
    posts = env.cache[key]
    for h in posts:
        cells = touched | frozenset(("heap", a) for a in h)
        yield Step(Unit(label, thread, cells, cells), None, st.with_heap({**frame, **h}))


# -- exploration -----------------------------------------------------------------


@dataclass
class EvalResult:
    finals: set[MachineState] = field(default_factory=set)
    faults: list[tuple[str, list[str]]] = field(default_factory=list)
    deadlocks: int = 0
    explored: int = 0
    inconclusive: bool = False


@dataclass
class Exploration:
    """The reachable configuration graph from one initial state."""

    start: tuple
    parent: dict = field(default_factory=dict)  # config -> (previous config, unit)
    edges: dict = field(default_factory=dict)  # config -> list of steps
    inconclusive: bool = False

    def trace(self, config) -> list[Unit]:
        out = []
        while self.parent.get(config) is not None:
            config, unit = self.parent[config]
            out.append(unit)
        return out[::-1]


def explore(c: Command, st: MachineState, env: Env) -> Exploration:
    start = (c, st)
    ex = Exploration(start, {start: None})
    queue = deque([start])
    try:
        while queue:
            config = queue.popleft()
            cmd, s = config
            if cmd is None:
                ex.edges[config] = []
                continue
            out = list(steps(cmd, s, env))
            ex.edges[config] = out
            for sp in out:
                if isinstance(sp.outcome, Fault):
                    continue
                nxt = (sp.residual, sp.outcome)
                if nxt not in ex.parent:
                    if len(ex.parent) >= env.fuel:
                        raise Inconclusive(len(ex.parent))
                    ex.parent[nxt] = (config, sp.unit)
                    queue.append(nxt)
    except Inconclusive:
        ex.inconclusive = True
    return ex


def eval_command(c: Command, st: MachineState, env: Env) -> EvalResult:
    ex = explore(c, st, env)
    res = EvalResult(explored=len(ex.parent), inconclusive=ex.inconclusive)
    for config, out in ex.edges.items():
        cmd, s = config
        if cmd is None:
            res.finals.add(s)
            continue
        if not out:
            res.deadlocks += 1
        for sp in out:
            if isinstance(sp.outcome, Fault):
                trace = [str(u) for u in ex.trace(config)] + [str(sp.unit)]
                res.faults.append((sp.outcome.message, trace))
    return res


def eval(
    c: Command,
    s: MachineState,
    fuel: int = DEFAULT_FUEL,
    domains: Domains | None = None,
    assumed: Mapping | None = None,
) -> EvalResult:
    """All final states of ``c`` from ``s`` under every interleaving.

    Without explicit ``domains`` every variable ranges over the default
    domain and the heap universe is the state's own heap.
    """
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    if domains is None:
        names = set(cmd_vars(c)) | {x for x, _ in s.store}
        domains = Domains({x: DEFAULT_DOMAIN for x in names}, tuple(a for a, _ in s.heap))
    return eval_command(c, s, Env(domains, assumed or {}, fuel))
