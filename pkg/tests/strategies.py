"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from concur.logic.hoare import disjoint
from concur.logic.lang import And as LAnd
from concur.logic.lang import (
    BinOp,
    BoolLit,
    Cmp,
    Emp,
    Implies,
    Neg,
    Not,
    Num,
    PointsTo,
    Pred,
    Star,
    Var,
)
from concur.logic.lang import Or as LOr
from concur.logic.parser import parse_command
from concur.pi.terms import (
    NIL,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    Restrict,
    Sum,
    Tau,
)

# Channel arity is fixed per name: a, b carry one name, c is a pure signal.
MONADIC = [Name("a"), Name("b")]
SIGNAL = Name("c")
BINDERS = [Name("x"), Name("y")]
PAYLOADS = [Name("x"), Name("y"), Name("m"), Name("n")]


def processes(max_leaves: int = 6):
    def extend(children):
        mon = st.sampled_from(MONADIC)
        return st.one_of(
            st.builds(Tau, children),
            st.builds(Output, mon, st.sampled_from(PAYLOADS), children),
            st.builds(Input, mon, st.sampled_from(BINDERS), children),
            st.builds(lambda p: Output(SIGNAL, None, p), children),
            st.builds(lambda p: Input(SIGNAL, None, p), children),
            st.builds(Sum, children, children),
            st.builds(Par, children, children),
            st.builds(Restrict, st.sampled_from(BINDERS + [SIGNAL]), children),
            st.builds(Match, st.sampled_from(PAYLOADS), st.sampled_from(PAYLOADS), children),
        )

    return st.recursive(st.just(NIL), extend, max_leaves=max_leaves)


def rename_apart(p, avoid: set, counter: list):
    """Rename every binder to a globally fresh name (an independent oracle)."""
    match p:
        case Nil():
            return p
        case Tau(q):
            return Tau(rename_apart(q, avoid, counter))
        case Output(c, d, q):
            return Output(c, d, rename_apart(q, avoid, counter))
        case Input(c, None, q):
            return Input(c, None, rename_apart(q, avoid, counter))
        case Input(c, bnd, q):
            counter[0] += 1
            new = Name("v", 1000 + counter[0])
            return Input(c, new, rename_apart(naive_subst(q, {bnd: new}), avoid, counter))
        case Restrict(bnd, q):
            counter[0] += 1
            new = Name("v", 1000 + counter[0])
            return Restrict(new, rename_apart(naive_subst(q, {bnd: new}), avoid, counter))
        case Sum(l, r) | Par(l, r):
            return type(p)(rename_apart(l, avoid, counter), rename_apart(r, avoid, counter))
        case Match(l, r, q):
            return Match(l, r, rename_apart(q, avoid, counter))
    raise TypeError(p)


def naive_subst(p, s):
    """Substitution that ignores capture, also under binders of other names."""
    f = lambda n: s.get(n, n)
    match p:
        case Nil():
            return p
        case Tau(q):
            return Tau(naive_subst(q, s))
        case Output(c, d, q):
            return Output(f(c), None if d is None else f(d), naive_subst(q, s))
        case Input(c, bnd, q):
            inner = {k: v for k, v in s.items() if k != bnd}
            return Input(f(c), bnd, naive_subst(q, inner))
        case Restrict(bnd, q):
            return Restrict(bnd, naive_subst(q, {k: v for k, v in s.items() if k != bnd}))
        case Sum(l, r) | Par(l, r):
            return type(p)(naive_subst(l, s), naive_subst(r, s))
        case Match(l, r, q):
            return Match(f(l), f(r), naive_subst(q, s))
    raise TypeError(p)


# -- the while language ---------------------------------------------------------------

def exprs(names=("x", "y")):
    leaves = st.one_of(st.builds(Num, st.integers(0, 12)), st.builds(Var, st.sampled_from(names)))

    def extend(e):
        return st.one_of(
            st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "%"]), e, e),
            st.builds(Neg, e.filter(lambda x: not isinstance(x, Num))),
        )

    return st.recursive(leaves, extend, max_leaves=4)


def assertions(names=("x", "y"), heap=True):
    e = exprs(names)
    leaves = [
        st.builds(BoolLit, st.booleans()),
        st.builds(Cmp, st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), e, e),
    ]
    if heap:
        addr = st.builds(Num, st.integers(10, 11))
        leaves += [
            st.just(Emp()),
            st.builds(PointsTo, addr, st.one_of(st.none(), e)),
            st.builds(Pred, st.sampled_from(["array", "sorted"]), st.tuples(addr, addr)),
        ]

    def extend(a):
        ops = [st.builds(Not, a), st.builds(LAnd, a, a), st.builds(LOr, a, a), st.builds(Implies, a, a)]
        if heap:
            ops.append(st.builds(Star, a, a))
        return st.one_of(*ops)

    return st.recursive(st.one_of(*leaves), extend, max_leaves=5)


def heaps(addrs=(10, 11, 12, 13), values=(0, 3)):
    cells = st.dictionaries(st.sampled_from(addrs), st.integers(*values), max_size=len(addrs))
    return cells


# -- disjoint command pairs -------------------------------------------------------------------

LEFT, RIGHT = ("x", "y"), ("z",)


def disjoint_pairs(n=24, seed=0):
    """Deterministically generated disjoint pairs: loops, branches and assignments."""
    rng = random.Random(seed)
    templates = [
        "{a} := {b} + {k}",
        "{a} := {b} * {k}; {b} := {a} - 1",
        "if {a} < {k} then {{ {a} := {a} + 1 }} else {{ {b} := {k} }}",
        "while {a} < {k} do {{ {a} := {a} + 1 }}",
        "{a} := {k}; {a} := {a} + {b}",
    ]

    def make(names):
        a, b = rng.choice(names), rng.choice(names)
        return rng.choice(templates).format(a=a, b=b, k=rng.randint(0, 7))

    out = []
    while len(out) < n:
        c1, c2 = parse_command(make(LEFT)), parse_command(make(RIGHT))
        if disjoint(c1, c2):
            out.append((c1, c2))
    return out
