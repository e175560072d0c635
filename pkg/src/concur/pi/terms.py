"""Pi-calculus terms, binding structure and capture-avoiding substitution.

Terms are immutable dataclasses.  ``Input`` and ``Restrict`` are the only
binders.  Channels are monadic, with an optional zero-arity form used for
pure synchronisation (``x<>.P`` / ``x().P``).
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Name:
    ident: str
    index: int = 0

    def __str__(self) -> str:
        return self.ident if self.index == 0 else f"{self.ident}'{self.index}"

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"


def fresh(base: Name, avoid: Iterable[Name]) -> Name:
    """Smallest ``base.ident'k`` (k >= 1) not in ``avoid``."""
    avoid = set(avoid)
    k = 1
    while Name(base.ident, k) in avoid:
        k += 1
    return Name(base.ident, k)


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class Sum:
    left: Process
    right: Process


@dataclass(frozen=True)
class Output:
    chan: Name
    payload: Name | None
    cont: Process


@dataclass(frozen=True)
class Input:
    chan: Name
    bind: Name | None
    cont: Process


@dataclass(frozen=True)
class Tau:
    cont: Process


@dataclass(frozen=True)
class Par:
    left: Process
    right: Process


@dataclass(frozen=True)
class Restrict:
    bind: Name
    body: Process


@dataclass(frozen=True)
class Match:
    lhs: Name
    rhs: Name
    body: Process


@dataclass(frozen=True)
class Call:
    agent: str
    args: tuple[Name, ...] = ()


Process = Nil | Sum | Output | Input | Tau | Par | Restrict | Match | Call

NIL = Nil()


@dataclass(frozen=True)
class AgentDef:
    id: str
    params: tuple[Name, ...]
    body: Process


class PiError(Exception):
    """Base class for ill-formed pi programs."""


class UnboundAgentError(PiError):
    pass


class ArityError(PiError):
    pass


class UnguardedRecursionError(PiError):
    pass


def free_names(p: Process) -> frozenset[Name]:
    match p:
        case Nil():
            return frozenset()
        case Sum(l, r) | Par(l, r):
            return free_names(l) | free_names(r)
        case Output(c, y, k):
            out = free_names(k) | {c}
            return out | {y} if y is not None else out
        case Input(c, x, k):
            inner = free_names(k)
            if x is not None:
                inner = inner - {x}
            return inner | {c}
        case Tau(k):
            return free_names(k)
        case Restrict(x, k):
            return free_names(k) - {x}
        case Match(a, b, k):
            return free_names(k) | {a, b}
        case Call(_, args):
            return frozenset(args)
    raise TypeError(f"not a process: {p!r}")


def all_names(p: Process) -> frozenset[Name]:
    """Every name occurring in ``p``, free or bound."""
    match p:
        case Nil():
            return frozenset()
        case Sum(l, r) | Par(l, r):
            return all_names(l) | all_names(r)
        case Output(c, y, k):
            return all_names(k) | {n for n in (c, y) if n is not None}
        case Input(c, x, k):
            return all_names(k) | {n for n in (c, x) if n is not None}
        case Tau(k):
            return all_names(k)
        case Restrict(x, k):
            return all_names(k) | {x}
        case Match(a, b, k):
            return all_names(k) | {a, b}
        case Call(_, args):
            return frozenset(args)
    raise TypeError(f"not a process: {p!r}")


def _rename_binder(x: Name, body: Process, s: dict[Name, Name]) -> tuple[Name, dict[Name, Name]]:
    s = {k: v for k, v in s.items() if k != x}
    fn_body = free_names(body)
    relevant = {k: v for k, v in s.items() if k in fn_body}
    if x in relevant.values():
        avoid = fn_body | set(relevant) | set(relevant.values())
        x2 = fresh(x, avoid)
        s = dict(relevant)
        s[x] = x2
        return x2, s
    return x, relevant


def substitute(p: Process, s: Mapping[Name, Name]) -> Process:
    """Simultaneous, capture-avoiding substitution of names.

    A binder is renamed (to ``fresh(binder, ...)``) only when it would
    capture a name in the image of the substitution.
    """
    s = {k: v for k, v in s.items() if k != v}
    if not s:
        return p
    return _subst(p, s)


def _subst(p: Process, s: dict[Name, Name]) -> Process:
    if not s:
        return p
    sub = lambda n: s.get(n, n)
    match p:
        case Nil():
            return p
        case Sum(l, r):
            return Sum(_subst(l, s), _subst(r, s))
        case Par(l, r):
            return Par(_subst(l, s), _subst(r, s))
        case Output(c, y, k):
            return Output(sub(c), None if y is None else sub(y), _subst(k, s))
        case Input(c, None, k):
            return Input(sub(c), None, _subst(k, s))
        case Input(c, x, k):
            x2, inner = _rename_binder(x, k, s)
            return Input(sub(c), x2, _subst(k, inner))
        case Tau(k):
            return Tau(_subst(k, s))
        case Restrict(x, k):
            x2, inner = _rename_binder(x, k, s)
            return Restrict(x2, _subst(k, inner))
        case Match(a, b, k):
            return Match(sub(a), sub(b), _subst(k, s))
        case Call(a, args):
            return Call(a, tuple(sub(n) for n in args))
    raise TypeError(f"not a process: {p!r}")


def canonical_key(p: Process) -> tuple:
    """Hashable key identifying ``p`` up to alpha-equivalence.

    Binders are numbered in traversal order; bound occurrences become the
    binder's number and free occurrences stay as names.
    """
    counter = [0]

    def name(n: Name | None, env: dict[Name, int]):
        if n is None:
            return None
        return ("b", env[n]) if n in env else ("f", n.ident, n.index)

    def bind(x: Name, env: dict[Name, int]) -> dict[Name, int]:
        env = dict(env)
        env[x] = counter[0]
        counter[0] += 1
        return env

    def go(p: Process, env: dict[Name, int]) -> tuple:
        match p:
            case Nil():
                return ("0",)
            case Sum(l, r):
                return ("+", go(l, env), go(r, env))
            case Par(l, r):
                return ("|", go(l, env), go(r, env))
            case Output(c, y, k):
                return ("out", name(c, env), name(y, env), go(k, env))
            case Input(c, None, k):
                return ("in", name(c, env), None, go(k, env))
            case Input(c, x, k):
                c_key = name(c, env)
                env2 = bind(x, env)
                return ("in", c_key, env2[x], go(k, env2))
            case Tau(k):
                return ("tau", go(k, env))
            case Restrict(x, k):
                env2 = bind(x, env)
                return ("new", env2[x], go(k, env2))
            case Match(a, b, k):
                return ("match", name(a, env), name(b, env), go(k, env))
            case Call(a, args):
                return ("call", a, tuple(name(n, env) for n in args))
        raise TypeError(f"not a process: {p!r}")

    return go(p, {})


def alpha_eq(p: Process, q: Process) -> bool:
    return canonical_key(p) == canonical_key(q)


def distinct_binders(p: Process, used: set[Name]) -> Process:
    """Rename binders so that each is distinct from every name in ``used``.

    ``used`` is updated in place with every binder kept or introduced, so
    repeated calls sharing one set give globally distinct binders.
    """
    match p:
        case Nil() | Call():
            return p
        case Sum(l, r):
            return Sum(distinct_binders(l, used), distinct_binders(r, used))
        case Par(l, r):
            return Par(distinct_binders(l, used), distinct_binders(r, used))
        case Output(c, y, k):
            return Output(c, y, distinct_binders(k, used))
        case Tau(k):
            return Tau(distinct_binders(k, used))
        case Match(a, b, k):
            return Match(a, b, distinct_binders(k, used))
        case Input(c, None, k):
            return Input(c, None, distinct_binders(k, used))
        case Input(_, x, k) | Restrict(x, k):
            if x in used:
                x2 = fresh(x, used | all_names(k))
                k = substitute(k, {x: x2})
                x = x2
            used.add(x)
            k = distinct_binders(k, used)
            return Input(p.chan, x, k) if isinstance(p, Input) else Restrict(x, k)
    raise TypeError(f"not a process: {p!r}")


def size(p: Process) -> int:
    match p:
        case Nil() | Call():
            return 1
        case Sum(l, r) | Par(l, r):
            return 1 + size(l) + size(r)
        case Output(_, _, k) | Input(_, _, k) | Tau(k) | Restrict(_, k) | Match(_, _, k):
            return 1 + size(k)
    raise TypeError(f"not a process: {p!r}")
