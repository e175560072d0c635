from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import PAYLOADS, naive_subst, processes, rename_apart

from concur.pi.parser import parse_process
from concur.pi.terms import (
    NIL,
    Name,
    Output,
    Restrict,
    all_names,
    alpha_eq,
    free_names,
    fresh,
    substitute,
)

a, b, m, x, y, z, w = (Name(s) for s in "abmxyzw")


def test_free_names_examples():
    assert free_names(parse_process("y<m>.0 | y(z).z(x).0")) == {y, m}
    assert free_names(NIL) == set()
    assert free_names(parse_process("(new x) y<x>.0")) == {y}


def test_name_equality_uses_index():
    assert Name("x", 1) != Name("x")
    assert Name("x", 2) == Name("x", 2)
    assert str(Name("x", 2)) == "x'2"


def test_fresh_avoids_inputs():
    assert fresh(x, [x, Name("x", 1)]) == Name("x", 2)
    assert fresh(x, []) == Name("x", 1)


def test_substitute_examples():
    assert substitute(parse_process("z(x).0"), {z: m}) == parse_process("m(x).0")
    p = parse_process("(new m) y<x>.0")
    got = substitute(p, {x: m})
    assert isinstance(got, Restrict) and got.bind != m
    assert got.body == Output(y, m, NIL)
    assert alpha_eq(got, parse_process("(new m'1) y<m>.0"))


def test_alpha_eq_examples():
    assert alpha_eq(parse_process("y(x).0"), parse_process("y(z).0"))
    assert not alpha_eq(parse_process("y<x>.0"), parse_process("y<z>.0"))
    assert alpha_eq(parse_process("(new x) y<x>.0"), parse_process("(new w) y<w>.0"))


subst_maps = st.dictionaries(st.sampled_from(PAYLOADS + [a, b]), st.sampled_from(PAYLOADS + [a, b]), max_size=3)


@settings(max_examples=200, deadline=None)
@given(processes(), subst_maps)
def test_substitute_matchesrename_apart_oracle(p, s):
    apart = rename_apart(p, set(), [0])
    assert alpha_eq(apart, p)
    assert alpha_eq(substitute(p, s), naive_subst(apart, s))


@settings(max_examples=200, deadline=None)
@given(processes())
def test_identity_substitution(p):
    assert substitute(p, {}) == p
    assert substitute(p, {n: n for n in free_names(p)}) == p


@settings(max_examples=200, deadline=None)
@given(processes(), st.sampled_from(PAYLOADS + [a]), st.sampled_from(PAYLOADS + [a]))
def test_swap_back_is_identity(p, src, dst):
    fresh_name = Name("q", 7)
    if fresh_name in all_names(p):
        return
    there = substitute(p, {src: fresh_name})
    back = substitute(there, {fresh_name: src})
    assert alpha_eq(back, p)


@settings(max_examples=200, deadline=None)
@given(processes(), subst_maps)
def test_free_names_after_substitution(p, s):
    fn = free_names(p)
    image = {s.get(n, n) for n in fn}
    assert free_names(substitute(p, s)) == image


@settings(max_examples=100, deadline=None)
@given(processes(), processes(), processes())
def test_alpha_eq_is_an_equivalence(p, q, r):
    p2 = rename_apart(p, set(), [0])
    assert alpha_eq(p, p)
    assert alpha_eq(p, p2) and alpha_eq(p2, p)
    if alpha_eq(p, q) and alpha_eq(q, r):
        assert alpha_eq(p, r)
    assert alpha_eq(p, q) == alpha_eq(q, p)
