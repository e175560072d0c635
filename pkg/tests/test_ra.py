from __future__ import annotations

from fractions import Fraction
from functools import reduce

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concur.logic.parser import parse_assertion, parse_command
from concur.logic.state import Domains
from concur.ra import (
    INVALID,
    AlgebraMismatch,
    Auth,
    AuthRA,
    Ex,
    ExclusiveRA,
    Frac,
    FracRA,
    HeapEl,
    HeapRA,
    Nat,
    NatRA,
    Pair,
    PairRA,
    Str,
    StrRA,
    algebras,
    auth_ok,
    invariant_rule_check,
    law_check,
)


def test_compose_examples():
    nat = NatRA()
    assert nat.compose(Nat(2), Nat(3)) == Nat(5)
    fr = FracRA()
    assert fr.compose(Frac.of(1, 2), Frac.of(1, 2)) == Frac.of(1, 1)
    assert fr.compose(Frac.of(3, 4), Frac.of(1, 2)) is INVALID
    assert StrRA().compose(Str("ab"), Str("b")) == Str("abb")
    assert ExclusiveRA().compose(Ex("a"), Ex("b")) is INVALID
    assert ExclusiveRA().compose(Ex("a"), Ex("a")) is INVALID


def test_unit_is_identity_everywhere():
    for ra in algebras().values():
        if ra.unit is None:
            continue
        for a in ra.carrier():
            assert ra.compose(a, ra.unit) == a == ra.compose(ra.unit, a)


def test_mismatch_is_a_usage_error():
    with pytest.raises(AlgebraMismatch):
        NatRA().compose(Nat(1), Frac.of(1, 2))
    with pytest.raises(ValueError):
        Frac.of(1, 0)


def test_pair_and_auth():
    pair = PairRA(ExclusiveRA(), FracRA())
    assert pair.compose(Pair(Ex("a"), Frac.of(1, 4)), Pair(Ex("b"), Frac.of(1, 4))) is INVALID
    auth = AuthRA(NatRA(5))
    assert auth.compose(Auth(Nat(5), Nat(1)), Auth(None, Nat(3))) == Auth(Nat(5), Nat(4))
    assert auth.compose(Auth(Nat(5), Nat(0)), Auth(Nat(5), Nat(0))) is INVALID
    assert auth.compose(Auth(Nat(2), Nat(1)), Auth(None, Nat(3))) is INVALID


def test_auth_ok_examples():
    nat = NatRA(5)
    assert auth_ok(Nat(5), Nat(3), nat)
    assert not auth_ok(Nat(5), Nat(7), nat)
    for full in range(6):
        assert auth_ok(Nat(full), nat.unit, nat)
    ex = ExclusiveRA()
    assert auth_ok(Ex("a"), Ex("a"), ex) and not auth_ok(Ex("a"), Ex("b"), ex)


def test_bundled_algebras_pass_laws_exhaustively():
    for name, ra in algebras().items():
        report = law_check(ra)
        assert report.exhaustive, name
        assert report.ok, (name, report.laws)
        assert report.carrier_size <= 21


def test_str_is_not_commutative():
    report = law_check(StrRA())
    assert report.laws["commutativity"].status == "n/a"
    assert StrRA().compose(Str("a"), Str("b")) != StrRA().compose(Str("b"), Str("a"))


class _Minus(NatRA):
    """Subtraction: not associative, so law_check must report a triple."""

    def op(self, a, b):
        return Nat(a.n - b.n)

    def valid(self, a):
        return True


def test_law_check_reports_counterexample_triples():
    report = law_check(_Minus(3))
    assert not report.ok
    assoc = report.laws["associativity"]
    assert assoc.status == "fail" and len(assoc.counterexample) == 3


def test_sampling_is_seeded():
    r1 = law_check(NatRA(20), sample_budget=500, seed=4)
    r2 = law_check(NatRA(20), sample_budget=500, seed=4)
    assert not r1.exhaustive
    assert r1.laws == r2.laws and r1.ok


def test_heap_algebra():
    h = HeapRA()
    assert h.compose(HeapEl.of({10: 0}), HeapEl.of({11: 1})) == HeapEl.of({10: 0, 11: 1})
    assert h.compose(HeapEl.of({10: 0}), HeapEl.of({10: 0})) is INVALID
    assert law_check(h).ok


def test_element_syntax():
    algs = algebras()
    assert algs["frac"].parse("3/8") == Frac.of(3, 8)
    assert algs["pair"].parse("(a, 1/2)") == Pair(Ex("a"), Frac.of(1, 2))
    assert algs["auth"].parse("auth(3, 1)") == Auth(Nat(3), Nat(1))
    assert algs["auth"].parse("frag(2)") == Auth(None, Nat(2))
    assert algs["heap"].parse("{10: 1, 11: 0}") == HeapEl.of({10: 1, 11: 0})
    assert algs["str"].render(Str("")) == '""'


GRID = [Fraction(k, 8) for k in range(1, 9)]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(GRID), min_size=1, max_size=5))
def test_frac_validity_is_sum_at_most_one(fs):
    fr = FracRA()
    got = reduce(fr.compose, [Frac(f) for f in fs])
    assert (got is not INVALID) == (sum(fs) <= 1)
    if got is not INVALID:
        assert got.q == sum(fs)


@settings(max_examples=300, deadline=None)
@given(
    st.sampled_from([Ex("a"), Ex("b"), INVALID]),
    st.sampled_from([Frac(q) for q in GRID] + [Frac(Fraction(9, 8)), INVALID]),
)
def test_pair_validity_is_componentwise(a, b):
    pair = PairRA(ExclusiveRA(), FracRA())
    va = a is not INVALID and pair.l.valid(a)
    vb = b is not INVALID and pair.r.valid(b)
    assert pair.valid(Pair(a, b)) == (va and vb)


def test_invariant_rule_examples():
    d = Domains({}, (10,), (0, 3))
    emp = parse_assertion("emp")
    either = parse_assertion("10 |-> 0 || 10 |-> 1")
    ok = invariant_rule_check(either, emp, parse_command("[10] := 1"), emp, d)
    assert ok.result == "pass" and ok.conclusion
    two = invariant_rule_check(either, emp, parse_command("[10] := 1; [10] := 0"), emp, d)
    assert two.result == "fail" and "physically atomic" in two.message and two.counterexample is None
    bad = invariant_rule_check(parse_assertion("10 |-> 0"), emp, parse_command("[10] := 1"), emp, d)
    assert bad.result == "fail"
    assert bad.counterexample == {"initial": {"heap": {"10": 0}}, "final": {"heap": {"10": 1}}}


def test_invariant_rule_rejects_regions():
    d = Domains({"s": (0, 1)}, (10,), (0, 1))
    emp = parse_assertion("emp")
    v = invariant_rule_check(emp, emp, parse_command("with s when true { skip }"), emp, d)
    assert v.result == "fail" and "physically atomic" in v.message
