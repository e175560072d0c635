"""Machine states, bounded domains, and satisfaction of assertions.

Heaps are partial maps from addresses to integers.  Assertions are read
with exact-heap semantics: ``emp``, ``e |-> v`` and the array predicates
describe the whole heap they are evaluated on, ``**`` splits the heap, and
pure formulas hold on any heap.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from .lang import (
    And,
    Assertion,
    BinOp,
    BoolLit,
    Cmp,
    Emp,
    Expr,
    Implies,
    Neg,
    Not,
    Num,
    Or,
    PointsTo,
    Pred,
    SemPred,
    Star,
    Var,
)

DEFAULT_DOMAIN = (0, 7)
ADDRESS_RANGE = (0, 15)
DEFAULT_FUEL = 100_000
DEFAULT_CAP = 1_000_000


class EvalError(Exception):
    """Runtime failure inside an expression (division by zero, unknown variable)."""


class DomainTooLarge(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"state space of {size} states exceeds the cap of {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class MachineState:
    store: tuple[tuple[str, int], ...]
    heap: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def of(store: Mapping[str, int], heap: Mapping[int, int] | None = None) -> MachineState:
        return MachineState(tuple(sorted(store.items())), tuple(sorted((heap or {}).items())))

    @property
    def s(self) -> dict[str, int]:
        return dict(self.store)

    @property
    def h(self) -> dict[int, int]:
        return dict(self.heap)

    def set_var(self, x: str, v: int) -> MachineState:
        return MachineState(tuple(sorted({**dict(self.store), x: v}.items())), self.heap)

    def set_cell(self, a: int, v: int) -> MachineState:
        return MachineState(self.store, tuple(sorted({**dict(self.heap), a: v}.items())))

    def with_heap(self, heap: Mapping[int, int]) -> MachineState:
        return MachineState(self.store, tuple(sorted(heap.items())))

    def render(self) -> dict:
        out: dict = dict(self.store)
        if self.heap:
            out["heap"] = {str(a): v for a, v in self.heap}
        return out

    def __str__(self) -> str:
        parts = [f"{x}={v}" for x, v in self.store]
        if self.heap:
            parts.append("heap{" + ", ".join(f"{a}->{v}" for a, v in self.heap) + "}")
        return " ".join(parts) if parts else "(empty)"


def wrap(v: int, lo: int, hi: int) -> int:
    return lo + (v - lo) % (hi - lo + 1)


@dataclass
class Domains:
    """Finite variable domains and the bounded heap universe."""

    vars: dict[str, tuple[int, int]] = field(default_factory=dict)
    heap_addrs: tuple[int, ...] = ()
    heap_values: tuple[int, int] = DEFAULT_DOMAIN
    cap: int = DEFAULT_CAP

    def wrap_var(self, x: str, v: int) -> int:
        if x not in self.vars:
            raise EvalError(f"undeclared variable {x}")
        return wrap(v, *self.vars[x])

    def wrap_cell(self, v: int) -> int:
        return wrap(v, *self.heap_values)

    def heap_count(self) -> int:
        lo, hi = self.heap_values
        return (hi - lo + 2) ** len(self.heap_addrs)

    def size(self) -> int:
        n = self.heap_count()
        for lo, hi in self.vars.values():
            n *= hi - lo + 1
        return n

    def stores(self) -> Iterator[dict[str, int]]:
        names = sorted(self.vars)
        ranges = [range(self.vars[x][0], self.vars[x][1] + 1) for x in names]
        for vals in itertools.product(*ranges):
            yield dict(zip(names, vals))

    def heaps(self) -> Iterator[dict[int, int]]:
        """Every partial heap over the universe (absent or any value per cell)."""
        lo, hi = self.heap_values
        options = [None, *range(lo, hi + 1)]
        for vals in itertools.product(options, repeat=len(self.heap_addrs)):
            yield {a: v for a, v in zip(self.heap_addrs, vals) if v is not None}

    def states(self) -> Iterator[MachineState]:
        if self.size() > self.cap:
            raise DomainTooLarge(self.size(), self.cap)
        heaps = list(self.heaps())
        for st in self.stores():
            for h in heaps:
                yield MachineState.of(st, h)


# -- expressions ---------------------------------------------------------------


def eval_expr(e: Expr, s: Mapping[str, int]) -> int:
    match e:
        case Num(v):
            return v
        case Var(x):
            if x not in s:
                raise EvalError(f"unknown variable {x}")
            return s[x]
        case Neg(x):
            return -eval_expr(x, s)
        case BinOp(op, l, r):
            a, b = eval_expr(l, s), eval_expr(r, s)
            match op:
                case "+":
                    return a + b
                case "-":
                    return a - b
                case "*":
                    return a * b
                case "/" | "%":
                    if b == 0:
                        raise EvalError("division by zero")
                    return a // b if op == "/" else a % b
    raise TypeError(f"not an expression: {e!r}")


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


# -- heaps -----------------------------------------------------------------------


def heap_star(h1: Mapping[int, int], h2: Mapping[int, int]) -> dict[int, int] | None:
    """Disjoint union of two heaps; None when their domains overlap."""
    if set(h1) & set(h2):
        return None
    return {**h1, **h2}


def splits(h: Mapping[int, int]) -> Iterator[tuple[dict[int, int], dict[int, int]]]:
    items = sorted(h.items())
    for mask in range(1 << len(items)):
        left = {a: v for i, (a, v) in enumerate(items) if mask >> i & 1}
        right = {a: v for i, (a, v) in enumerate(items) if not mask >> i & 1}
        yield left, right


def subheaps(h: Mapping[int, int]) -> Iterator[dict[int, int]]:
    for left, _ in splits(h):
        yield left


# -- satisfaction ----------------------------------------------------------------


def holds(a: Assertion, s: Mapping[str, int], h: Mapping[int, int]) -> bool:
    """Satisfaction of ``a`` by store ``s`` and heap ``h``.

    Expressions that fail to evaluate make their atom false.
    """
    try:
        return _holds(a, s, h)
    except EvalError:
        return False


def _holds(a: Assertion, s: Mapping[str, int], h: Mapping[int, int]) -> bool:
    match a:
        case BoolLit(v):
            return v
        case Cmp(op, l, r):
            try:
                return _CMP[op](eval_expr(l, s), eval_expr(r, s))
            except EvalError:
                return False
        case Not(x):
            return not holds(x, s, h)
        case And(l, r):
            return _holds(l, s, h) and _holds(r, s, h)
        case Or(l, r):
            return _holds(l, s, h) or _holds(r, s, h)
        case Implies(l, r):
            return not _holds(l, s, h) or _holds(r, s, h)
        case Emp():
            return not h
        case PointsTo(addr, val):
            if len(h) != 1:
                return False
            ((cell, v),) = h.items()
            return cell == eval_expr(addr, s) and (val is None or v == eval_expr(val, s))
        case Star(l, r):
            return any(_holds(l, s, h1) and _holds(r, s, h2) for h1, h2 in splits(h))
        case Pred(name, (i, j)):
            lo, hi = eval_expr(i, s), eval_expr(j, s)
            if set(h) != set(range(lo, hi + 1)):
                return False
            if name == "sorted":
                vals = [h[k] for k in range(lo, hi + 1)]
                return all(x <= y for x, y in itertools.pairwise(vals))
            return True
        case SemPred(_, fn):
            return fn(s, h)
    raise TypeError(f"not an assertion: {a!r}")


def sat(state: MachineState, a: Assertion) -> bool:
    return holds(a, state.s, state.h)


def footprints(a: Assertion, state: MachineState) -> list[dict[int, int]]:
    """Minimal sub-heaps of the state's heap on which ``a`` holds."""
    s, h = state.s, state.h
    found = [sub for sub in subheaps(h) if holds(a, s, sub)]
    return [f for f in found if not any(set(g) < set(f) for g in found)]


def addresses_in(a: Assertion) -> set[int]:
    """Constant addresses mentioned by heap atoms (used to infer a heap universe)."""
    match a:
        case PointsTo(Num(v), _):
            return {v}
        case Pred(_, (Num(i), Num(j))):
            return set(range(i, j + 1))
        case Not(x):
            return addresses_in(x)
        case And(l, r) | Or(l, r) | Implies(l, r) | Star(l, r):
            return addresses_in(l) | addresses_in(r)
    return set()
