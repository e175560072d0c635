"""Abstract syntax for the while-language, its assertions, and printing.

Commands carry a mutable ``meta`` record (source line, attached
annotations, rule hints) that is excluded from equality and hashing, so
configurations built from the same program compare structurally.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

# -- integer expressions -----------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / %
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg:
    operand: Expr


Expr = Num | Var | BinOp | Neg


# -- assertions (boolean conditions are the pure fragment) -------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: Assertion


@dataclass(frozen=True)
class And:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Or:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Implies:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class PointsTo:
    addr: Expr
    value: Expr | None  # None: any value


@dataclass(frozen=True)
class Star:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Pred:
    """Built-in heap predicates ``array(i, j)`` and ``sorted(i, j)``."""

    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, eq=False)
class SemPred:
    """A semantic predicate on (store, heap); used for derived conditions."""

    label: str
    fn: Callable[[dict, dict], bool]


Assertion = BoolLit | Cmp | Not | And | Or | Implies | Emp | PointsTo | Star | Pred | SemPred

TRUE = BoolLit(True)
FALSE = BoolLit(False)
PREDICATES = {"array": 2, "sorted": 2}


def conj(*parts: Assertion) -> Assertion:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def star(*parts: Assertion) -> Assertion:
    out = parts[0]
    for p in parts[1:]:
        out = Star(out, p)
    return out


# -- commands ----------------------------------------------------------------


@dataclass
class Meta:
    line: int | None = None
    ann: tuple = ()  # annotations written immediately before the command
    trailing: tuple = ()  # for blocks: annotations after the last command
    rule: str | None = None
    pre: Assertion | None = None  # assertion in force before, set by the checker
    post: Assertion | None = None  # for blocks: the block's postcondition
    branch_posts: tuple = ()  # for par/or nodes: each branch's postcondition


def _meta() -> Meta:
    return Meta()


@dataclass(frozen=True)
class Skip:
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Load:
    var: str
    addr: Expr
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Store:
    addr: Expr
    expr: Expr
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    items: tuple[Command, ...]
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Assertion
    then: Command
    else_: Command
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Assertion
    body: Command
    inv: Assertion | None = None
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Par:
    left: Command
    right: Command
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Either:
    """``c1 or c2``: both run; the whole completes when either one does."""

    left: Command
    right: Command
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Ccr:
    resource: str
    guard: Assertion
    body: Command
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    """Invocation of an assumed (axiomatised) triple."""

    name: str
    meta: Meta = field(default_factory=_meta, compare=False, repr=False)


Command = Skip | Assign | Load | Store | Seq | If | While | Par | Either | Ccr | Call
ATOMIC = (Skip, Assign, Load, Store)


def seq(*cmds: Command) -> Command:
    flat: list[Command] = []
    for c in cmds:
        flat.extend(c.items if isinstance(c, Seq) else [c])
    return flat[0] if len(flat) == 1 else Seq(tuple(flat))


def semaphore_p(s: str) -> Ccr:
    """``P(s)``: wait until s > 0, then decrement, atomically."""
    return Ccr(s, Cmp(">", Var(s), Num(0)), Seq((Assign(s, BinOp("-", Var(s), Num(1))),)))


def semaphore_v(s: str) -> Ccr:
    return Ccr(s, TRUE, Seq((Assign(s, BinOp("+", Var(s), Num(1))),)))


# -- printing ----------------------------------------------------------------

_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def show_expr(e: Expr, ctx: int = 0) -> str:
    match e:
        case Num(v):
            return str(v) if v >= 0 or ctx == 0 else f"({v})"
        case Var(n):
            return n
        case Neg(x):
            return f"-{show_expr(x, 3)}"
        case BinOp(op, l, r):
            prec = _EXPR_PREC[op]
            text = f"{show_expr(l, prec)} {op} {show_expr(r, prec + 1)}"
            return f"({text})" if prec < ctx else text
    raise TypeError(f"not an expression: {e!r}")


# implies 0 < or 1 < and 2 < star 3 < unary 4
def show_assertion(a: Assertion, ctx: int = 0) -> str:
    def wrap(text: str, prec: int) -> str:
        return f"({text})" if prec < ctx else text

    match a:
        case BoolLit(v):
            return "true" if v else "false"
        case Cmp(op, l, r):
            return f"{show_expr(l)} {op} {show_expr(r)}"
        case Not(x):
            return f"!{show_assertion(x, 4)}"
        case Implies(l, r):
            return wrap(f"{show_assertion(l, 1)} ==> {show_assertion(r, 0)}", 0)
        case Or(l, r):
            return wrap(f"{show_assertion(l, 1)} || {show_assertion(r, 2)}", 1)
        case And(l, r):
            return wrap(f"{show_assertion(l, 2)} && {show_assertion(r, 3)}", 2)
        case Star(l, r):
            return wrap(f"{show_assertion(l, 3)} ** {show_assertion(r, 4)}", 3)
        case Emp():
            return "emp"
        case PointsTo(addr, val):
            return f"{show_expr(addr, 3)} |-> {'_' if val is None else show_expr(val, 3)}"
        case Pred(name, args):
            return f"{name}({', '.join(show_expr(x) for x in args)})"
        case SemPred(label, _):
            return f"<{label}>"
    raise TypeError(f"not an assertion: {a!r}")


def show_cmd(c: Command | None) -> str:
    """One-line rendering, used in traces and reports."""
    match c:
        case None:
            return "done"
        case Skip():
            return "skip"
        case Assign(x, e):
            return f"{x} := {show_expr(e)}"
        case Load(x, a):
            return f"{x} := [{show_expr(a)}]"
        case Store(a, e):
            return f"[{show_expr(a)}] := {show_expr(e)}"
        case Seq(items):
            return "; ".join(show_cmd(i) for i in items) if items else "skip"
        case If(b, t, f):
            return f"if {show_assertion(b)} then {{ {show_cmd(t)} }} else {{ {show_cmd(f)} }}"
        case While(b, body, _):
            return f"while {show_assertion(b)} do {{ {show_cmd(body)} }}"
        case Par(l, r):
            return f"par {{ {show_cmd(l)} }} {{ {show_cmd(r)} }}"
        case Either(l, r):
            return f"or {{ {show_cmd(l)} }} {{ {show_cmd(r)} }}"
        case Ccr(res, g, body):
            return f"with {res} when {show_assertion(g)} {{ {show_cmd(body)} }}"
        case Call(name):
            return f"call {name}"
    raise TypeError(f"not a command: {c!r}")


# -- variable analysis ---------------------------------------------------------


def expr_vars(e: Expr) -> frozenset[str]:
    match e:
        case Num():
            return frozenset()
        case Var(n):
            return frozenset({n})
        case Neg(x):
            return expr_vars(x)
        case BinOp(_, l, r):
            return expr_vars(l) | expr_vars(r)
    raise TypeError(f"not an expression: {e!r}")


def assertion_vars(a: Assertion) -> frozenset[str]:
    match a:
        case BoolLit() | Emp() | SemPred():
            return frozenset()
        case Cmp(_, l, r):
            return expr_vars(l) | expr_vars(r)
        case Not(x):
            return assertion_vars(x)
        case And(l, r) | Or(l, r) | Implies(l, r) | Star(l, r):
            return assertion_vars(l) | assertion_vars(r)
        case PointsTo(addr, val):
            return expr_vars(addr) | (expr_vars(val) if val is not None else frozenset())
        case Pred(_, args):
            out = frozenset()
            for x in args:
                out |= expr_vars(x)
            return out
    raise TypeError(f"not an assertion: {a!r}")


def is_pure(a: Assertion) -> bool:
    match a:
        case BoolLit() | Cmp():
            return True
        case Not(x):
            return is_pure(x)
        case And(l, r) | Or(l, r) | Implies(l, r):
            return is_pure(l) and is_pure(r)
    return False


def children(c: Command) -> tuple[Command, ...]:
    match c:
        case Seq(items):
            return items
        case If(_, t, f):
            return (t, f)
        case While(_, body, _):
            return (body,)
        case Par(l, r) | Either(l, r):
            return (l, r)
        case Ccr(_, _, body):
            return (body,)
    return ()


def writes(c: Command) -> frozenset[str]:
    match c:
        case Assign(x, _) | Load(x, _):
            return frozenset({x})
    out = frozenset()
    for ch in children(c):
        out |= writes(ch)
    return out


def reads(c: Command) -> frozenset[str]:
    match c:
        case Assign(_, e):
            return expr_vars(e)
        case Load(_, a):
            return expr_vars(a)
        case Store(a, e):
            return expr_vars(a) | expr_vars(e)
        case If(b, _, _) | While(b, _, _) | Ccr(_, b, _):
            own = assertion_vars(b)
        case _:
            own = frozenset()
    for ch in children(c):
        own |= reads(ch)
    return own


def cmd_vars(c: Command) -> frozenset[str]:
    return reads(c) | writes(c)


def heap_accesses(c: Command) -> list[tuple[str, Expr | None]]:
    """Syntactic heap accesses as (kind, address); calls touch unknown cells."""
    match c:
        case Load(_, a):
            return [("read", a)]
        case Store(a, _):
            return [("write", a)]
        case Call():
            return [("write", None)]
    out = []
    for ch in children(c):
        out += heap_accesses(ch)
    return out


def walk(c: Command):
    yield c
    for ch in children(c):
        yield from walk(ch)
