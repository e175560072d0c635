from __future__ import annotations

import pytest
from hypothesis import given, settings
from strategies import processes

from concur.pi.parser import PiSyntaxError, parse_process, parse_program, print_process
from concur.pi.terms import (
    NIL,
    ArityError,
    Call,
    Input,
    Name,
    Nil,
    Output,
    Par,
    Restrict,
    UnboundAgentError,
    UnguardedRecursionError,
    alpha_eq,
)

a, m, x, y, z = (Name(s) for s in "amxyz")


def test_parse_examples():
    assert parse_process("y<m>.0 | y(z).z(x).0") == Par(Output(y, m, NIL), Input(y, z, Input(z, x, NIL)))
    assert parse_process("0") == Nil()
    prog = parse_program("agent Exec2(x) = x(y).y<>.0 \n main Exec2(a)")
    assert prog.user_defs == ("Exec2",)
    assert prog.main == Call("Exec2", (a,))


def test_program_preloads_standard_agents():
    prog = parse_program("main Exec(a)")
    assert {"Exec", "Copy", "And"} <= set(prog.defs)
    assert prog.main == Call("Exec", (a,))


def test_print_examples():
    assert print_process(Nil()) == "0"
    assert print_process(Par(Output(y, m, NIL), Input(y, z, Input(z, x, NIL)))) == "y<m>.0 | y(z).z(x).0"
    assert print_process(Restrict(x, Output(y, x, NIL))) == "(new x) y<x>.0"


def test_precedence():
    p = parse_process("a<>.0 | b<>.0 + tau.0")
    assert print_process(p) == "a<>.0 | b<>.0 + tau.0"
    q = parse_process("a<>.(b<>.0 | tau.0)")
    assert print_process(q) == "a<>.(b<>.0 | tau.0)"
    assert parse_process("(a<>.0 | b<>.0) + tau.0") == p


def test_comments_and_fresh_suffix():
    p = parse_process("# note\n a<x'2>.0")
    assert p == Output(a, Name("x", 2), NIL)


def test_syntax_error_position():
    with pytest.raises(PiSyntaxError) as err:
        parse_program("main a<b>.\n  | 0")
    assert (err.value.line, err.value.col) == (2, 3)


def test_load_time_errors():
    with pytest.raises(UnboundAgentError):
        parse_program("main Nope(a)")
    with pytest.raises(ArityError):
        parse_program("agent A(x) = x<>.0\nmain A(a, a)")
    with pytest.raises(ArityError):
        parse_program("main a<b>.0 | a().0")
    with pytest.raises(UnguardedRecursionError):
        parse_program("agent A(x) = A(x) | x<>.0\nmain A(a)")
    with pytest.raises(PiSyntaxError):
        parse_program("agent Exec(x) = x<>.0\nmain 0")


def test_guarded_recursion_accepted():
    prog = parse_program("agent Loop(x) = x<>.Loop(x)\nmain Loop(a)")
    assert prog.main == Call("Loop", (a,))


@settings(max_examples=300, deadline=None)
@given(processes(8))
def test_round_trip(p):
    text = print_process(p)
    assert alpha_eq(parse_process(text), p)
    assert parse_process(text) == p
    assert print_process(parse_process(text)) == text
