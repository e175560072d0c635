from __future__ import annotations

import time
from pathlib import Path

import pytest

import concur
from concur.logic.csl import check_outline_csl
from concur.logic.hoare import (
    DISCHARGED,
    FAIL,
    INCONCLUSIVE,
    PASS,
    WARNING,
    check_outline,
    check_triple,
    commutes,
    disjoint,
    entails,
    semicommutes,
)
from concur.logic.parser import parse_assertion, parse_command, parse_outline
from concur.logic.state import Domains, DomainTooLarge, MachineState

CORPUS = Path(concur.__file__).parent / "corpus"
X = Domains({"x": (0, 7)})
XY = Domains({"x": (0, 7), "y": (0, 7)})
A = parse_assertion
C = parse_command


def check(text: str):
    o = parse_outline(text)
    return (check_outline_csl if o.csl else check_outline)(o)


def test_entails_examples():
    assert entails(A("x = 1"), A("x >= 0"), X)
    assert entails(A("x < 4 && x > 2"), A("x < 4 && x > 2"), X)
    e = entails(A("x >= 0"), A("x = 1"), X)
    assert not e and e.counterexample == MachineState.of({"x": 0})


def test_entails_errors():
    with pytest.raises(ValueError):
        entails(A("y = 1"), A("true"), X)
    with pytest.raises(DomainTooLarge, match="cap"):
        entails(A("true"), A("true"), Domains({"x": (0, 99), "y": (0, 99)}, cap=100))


def test_check_triple_examples():
    assert check_triple(A("3 = 3"), C("x := 3"), A("x = 3"), X).result == PASS
    assert check_triple(A("true"), C("skip"), A("true"), X).result == PASS
    assert check_triple(A("x = 0"), C("while x < 3 do { x := x + 1 }"), A("x = 3"), X).result == PASS


def test_check_triple_failures():
    v = check_triple(A("true"), C("x := x + 1"), A("x > 0"), X)
    assert v.result == FAIL and v.counterexample == MachineState.of({"x": 7})
    v = check_triple(A("true"), C("x := [10]"), A("true"), X)
    assert v.result == FAIL and "fault" in v.message and v.trace
    v = check_triple(A("true"), C("while true do { skip }"), A("false"), Domains({"x": (0, 1)}), fuel=10)
    assert v.result == INCONCLUSIVE


def test_disjoint_examples():
    assert disjoint(C("x := 1"), C("y := 2"))
    assert not disjoint(C("x := 1"), C("y := x"))
    assert disjoint(C("skip"), C("while x < 3 do { x := x + 1 }"))
    assert not disjoint(C("[10] := 1"), C("x := [10]"))
    assert disjoint(C("[10] := 1"), C("x := [11]"))
    assert not disjoint(C("[x] := 1"), C("y := [11]"))


def test_semicommutes_examples():
    assert commutes(C("x := x + 1"), C("y := y * 2"), XY)
    v = commutes(C("x := x + 1"), C("x := 2 * x"), X)
    assert v.result == FAIL and MachineState.of({"x": 1}) in v.counterexamples
    assert commutes(C("x := x + 1"), C("skip"), X)


def test_semicommutes_is_one_directional():
    # awaiting x = 0 before resetting x blocks more often than after it
    q1, q2 = C("x := 0"), C("with r when x = 0 { skip }")
    assert semicommutes(q1, q2, X).result == PASS
    assert semicommutes(q2, q1, X).result == FAIL


def test_semicommutes_reflexive():
    for q in ("x := x + 1", "x := 2 * x", "skip", "if x < 3 then { x := 0 } else { skip }"):
        assert semicommutes(C(q), C(q), X)


def test_asymmetric_rejected_when_not_disjoint():
    v = check((CORPUS / "asym_par_reject.outline").read_text())
    assert v.result == FAIL
    [bad] = v.failures
    assert bad.rule == "asymmetric-parallel" and "not disjoint" in bad.message


def test_asymmetric_accepted():
    v = check((CORPUS / "asym_par.outline").read_text())
    assert v.result == PASS
    assert any(ob.rule == "asymmetric-parallel" for ob in v.obligations)


def test_collusion_accepted():
    v = check((CORPUS / "collusion.outline").read_text())
    assert v.result == PASS
    assert any(ob.rule == "collusion" and ob.status == DISCHARGED for ob in v.obligations)


def test_while_rule():
    v = check((CORPUS / "while.outline").read_text())
    assert v.result == PASS
    assert any(ob.rule == "while" for ob in v.obligations)


def test_consequence_counterexample():
    v = check((CORPUS / "consequence_reject.outline").read_text())
    [bad] = v.failures
    assert bad.rule == "consequence" and bad.counterexample == {"x": 0}


def test_unannotated_node_rejected():
    v = check("var x in 0..7; { x = 0 } while x < 3 do { x := x + 1 }")
    assert v.result == FAIL


def test_two_way_shape_and_warning():
    v = check((CORPUS / "two_way.outline").read_text())
    assert v.result == PASS
    assert [ob.rule for ob in v.warnings] == ["two-way"]
    v = check((CORPUS / "two_way_reject.outline").read_text())
    assert v.result == FAIL and "shape mismatch" in v.failures[0].message


def test_two_way_as_printed_is_unsound():
    text = """
    var x in 0..7;
    { true && true }
    rule: two-way
    par {
      { true && true }
      x := 1
      { true && x = 1 }
    } {
      { true && true }
      x := 2
      { true && x = 2 }
    }
    { x = 1 && x = 2 }
    """
    o = parse_outline(text)
    v = check_outline(o)
    assert v.result == PASS and v.warnings
    assert check_triple(o.pre, o.body, o.post, o.domains).result == FAIL


def _corpus_roots():
    for path in sorted(CORPUS.glob("*.outline")):
        yield path.name, parse_outline(path.read_text())


def test_corpus_covers_every_rule():
    rules = set()
    for _, o in _corpus_roots():
        v = (check_outline_csl if o.csl else check_outline)(o)
        rules |= {ob.rule for ob in v.obligations if ob.status in (DISCHARGED, WARNING)}
    expected = {
        "skip", "assignment", "sequence", "if", "while", "consequence", "asymmetric-parallel",
        "collusion", "two-way", "disjoint-parallel", "frame", "heap-store", "heap-load",
        "resource-initialization", "resource-finalization", "assumed", "critical-region",
    }
    assert expected <= rules, expected - rules


def test_soundness_on_corpus():
    start = time.perf_counter()
    accepted = 0
    for name, o in _corpus_roots():
        v = (check_outline_csl if o.csl else check_outline)(o)
        if v.result == PASS:
            accepted += 1
            root = check_triple(o.pre, o.body, o.post, o.domains, assumed=o.assumed)
            assert root.result == PASS, (name, root.message)
    assert accepted >= 15
    assert time.perf_counter() - start < 30
