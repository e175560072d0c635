from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from strategies import processes, rename_apart

import concur
from concur.pi.encodings import FALSE, TRUE, delivered, gate_scenario, std_env
from concur.pi.parser import parse_process, parse_program, print_process
from concur.pi.semantics import (
    TAU,
    BoundOutput,
    FreeOutput,
    InputAct,
    explore_reductions,
    reduce_step,
    run_trace,
    transitions,
)
from concur.pi.terms import Name, Par, alpha_eq, canonical_key, free_names

CORPUS = Path(concur.__file__).parent / "corpus"
STD = std_env()


def test_transmit_tau():
    p = parse_process("y<m>.0 | y(z).z(x).0")
    taus = [t.target for t in transitions(p, {}) if t.action == TAU]
    assert [print_process(t) for t in taus] == ["0 | m(x).0"]


def test_nil_has_no_transitions():
    assert transitions(parse_process("0"), {}) == []
    assert reduce_step(parse_process("0"), {}) == []


def test_scope_extrusion_example():
    p = parse_process("(new x) y<x>.0")
    [t] = transitions(p, {})
    assert isinstance(t.action, BoundOutput)
    assert t.action.chan == Name("y")
    assert t.action.fresh not in free_names(p)
    assert print_process(t.target) == "0"


def test_restriction_blocks_its_channel():
    assert transitions(parse_process("(new y) y<m>.0"), {}) == []


def test_input_instantiation_universe():
    p = parse_process("a(x).x<>.0")
    acts = [t.action for t in transitions(p, {}, [Name("b")])]
    assert all(isinstance(act, InputAct) for act in acts)
    received = {act.received for act in acts}
    assert Name("b") in received
    assert len(received) == 2  # b and one canonical fresh name


def test_match_fires_only_on_equal_names():
    assert reduce_step(parse_process("[a=a] tau.0"), {}) != []
    assert reduce_step(parse_process("[a=b] tau.0"), {}) == []


def test_tau_sum_collapses():
    assert [print_process(q) for q in reduce_step(parse_process("tau.0 + tau.0"), {})] == ["0"]


def test_executor_chain_any_seed():
    prog = parse_program((CORPUS / "executor.pi").read_text())
    for seed in range(5):
        tr = run_trace(prog.main, prog.defs, scheduler_seed=seed)
        assert [print_process(s.target) for s in tr.steps] == ["z().P() | z<>.0", "P() | 0"]
        assert tr.status == "terminated"


def test_run_trace_nil_and_budget():
    tr = run_trace(parse_process("0"), {}, scheduler_seed=3)
    assert tr.steps == [] and tr.status == "terminated"
    prog = parse_program("agent Spin(x) = tau.Spin(x)\nmain Spin(a)")
    tr = run_trace(prog.main, prog.defs, max_steps=5)
    assert len(tr.steps) == 5 and tr.status == "budget-exhausted"
    with pytest.raises(ValueError):
        run_trace(prog.main, prog.defs, max_steps=-1)


def test_run_trace_is_deterministic_per_seed():
    p = parse_process("a<>.0 | a().0 | a().0 | b<>.0 | b().0")
    runs = [[print_process(s.target) for s in run_trace(p, {}, scheduler_seed=7).steps] for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_and_gate_delivers_false():
    p = gate_scenario("And", (TRUE, FALSE))
    tr = run_trace(p, STD, scheduler_seed=1)
    assert delivered(tr.final, STD) == {FALSE}


@settings(max_examples=200, deadline=None)
@given(processes())
def test_extrusion_soundness(p):
    for t in transitions(p, {}):
        if isinstance(t.action, BoundOutput):
            assert t.action.fresh not in free_names(p)


@settings(max_examples=200, deadline=None)
@given(processes())
def test_reduce_step_is_tau_projection(p):
    taus = {canonical_key(t.target) for t in transitions(p, {}) if t.action == TAU}
    assert {canonical_key(q) for q in reduce_step(p, {})} == taus


@settings(max_examples=200, deadline=None)
@given(processes(4), processes(4))
def test_par_synchronises_free_outputs(a, b):
    universe = free_names(Par(a, b))
    taus = [t.target for t in transitions(Par(a, b), {}, universe) if t.action == TAU]
    outs = [t for t in transitions(a, {}, universe) if isinstance(t.action, FreeOutput)]
    ins = [t for t in transitions(b, {}, universe) if isinstance(t.action, InputAct)]
    for o in outs:
        for i in ins:
            if (o.action.chan, o.action.payload) == (i.action.chan, i.action.received):
                assert any(alpha_eq(Par(o.target, i.target), q) for q in taus)


@settings(max_examples=100, deadline=None)
@given(processes())
def test_transitions_invariant_under_alpha(p):
    q = rename_apart(p, set(), [0])

    def visible(r):
        return {
            (str(t.action), canonical_key(t.target))
            for t in transitions(r, {})
            if t.action == TAU or isinstance(t.action, FreeOutput)
        }

    assert visible(p) == visible(q)


def test_transmit_trace_all_is_single_path():
    prog = parse_program((CORPUS / "transmit.pi").read_text())
    g = explore_reductions(prog.main, prog.defs)
    paths = [[print_process(g.states[i]) for i in path] for path in g.maximal_paths()]
    assert paths == [["y<m>.0 | y(z).z(x).0", "0 | m(x).0"]]
