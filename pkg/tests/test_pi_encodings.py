from __future__ import annotations

from pathlib import Path

import concur
from concur.pi.bisim import bisimilar
from concur.pi.encodings import (
    FALSE,
    TRUE,
    case,
    gate_scenario,
    run_to_value,
    std_env,
    stdlib,
    truth_table,
)
from concur.pi.parser import parse_process, parse_program, print_process
from concur.pi.semantics import explore_reductions, reduce_step
from concur.pi.terms import Call, Input, Name, Par, Restrict, free_names

STD = std_env()
CORPUS = Path(concur.__file__).parent / "corpus"


def test_definitions():
    defs = {d.id: d for d in stdlib()}
    assert print_process(defs["Exec"].body) == "x(y).y<>.0"
    assert print_process(defs["Copy"].body) == "[y=T] z<T>.0 + [y=F] z<F>.0"
    assert print_process(defs["And"].body) == "[x=T] Copy(y, out) + [x=F] out<F>.0"
    for d in defs.values():
        assert free_names(d.body) <= set(d.params) | {TRUE, FALSE}


def test_executor_reduces_to_p_par_nil():
    prog = parse_program((CORPUS / "executor.pi").read_text())
    g = explore_reductions(prog.main, prog.defs)
    finals = {print_process(g.states[i]) for i in g.terminals()}
    assert finals == {"P() | 0"}
    assert all(len(path) == 3 for path in g.maximal_paths())


def test_copy_instantiates_receiver():
    z, w = Name("z"), Name("w")
    p = Restrict(z, Par(Call("Copy", (TRUE, z)), Input(z, w, parse_process("res<w>.0"))))
    assert run_to_value(p, STD) == TRUE


def test_and_false_true():
    assert run_to_value(gate_scenario("And", (FALSE, TRUE)), STD) == FALSE


def test_truth_table_is_logical_and():
    rows = truth_table("And")
    assert [(r.x, r.y, r.result) for r in rows] == [
        (TRUE, TRUE, TRUE),
        (TRUE, FALSE, FALSE),
        (FALSE, TRUE, FALSE),
        (FALSE, FALSE, FALSE),
    ]


def test_gate_runs_are_convergent():
    for a in (TRUE, FALSE):
        for b in (TRUE, FALSE):
            g = explore_reductions(gate_scenario("And", (a, b)), STD)
            assert not g.truncated
            assert len({print_process(g.states[i]) for i in g.terminals()}) == 1


def test_copy_bisimilar_to_output():
    z = Name("z")
    for v in (TRUE, FALSE):
        assert bisimilar(Call("Copy", (v, z)), parse_process(f"z<{v}>.0"), STD).bisimilar


def test_case_sugar():
    y = Name("y")
    p = case(y, {TRUE: parse_process("a<>.0"), FALSE: parse_process("b<>.0")})
    assert print_process(p) == "[y=T] a<>.0 + [y=F] b<>.0"
    assert reduce_step(p, {}) == []
