"""Concrete syntax for pi programs.

    program  := (agentdef)* "main" process
    agentdef := "agent" IDENT "(" params? ")" "=" process
    process  := par ("+" par)*
    par      := prefix ("|" prefix)*
    prefix   := "0" | "tau" "." prefix
              | IDENT "<" IDENT? ">" "." prefix
              | IDENT "(" IDENT? ")" "." prefix
              | "(new" IDENT ")" prefix
              | "[" IDENT "=" IDENT "]" prefix
              | IDENT "(" args? ")"
              | "(" process ")"

``#`` starts a line comment.  Names may carry a freshness suffix ``x'2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .program import PiProgram, check_program
from .terms import (
    NIL,
    AgentDef,
    Call,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    PiError,
    Process,
    Restrict,
    Sum,
    Tau,
)

KEYWORDS = {"agent", "main", "tau", "new"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:'[0-9]+)?)
  | (?P<zero>0)
  | (?P<punct>[<>().|+\[\]=,])
    """,
    re.VERBOSE,
)


class PiSyntaxError(PiError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PiSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind != "ws":
            if kind == "ident" and tok_text in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, tok_text, line, pos - line_start + 1))
        nl = tok_text.count("\n")
        if nl:
            line += nl
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _name(text: str) -> Name:
    if "'" in text:
        ident, idx = text.split("'")
        return Name(ident, int(idx))
    return Name(text)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise PiSyntaxError(f"{msg} (found {found!r})", tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("punct", "kw", "zero"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if not self.accept(text):
            self.error(f"expected {text!r}")
        return tok

    def ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            self.error("expected a name")
        self.i += 1
        return tok.text

    def program(self) -> tuple[list[tuple[AgentDef, _Tok]], Process]:
        defs = []
        while self.tok.text == "agent" and self.tok.kind == "kw":
            start = self.tok
            self.i += 1
            agent_id = self.ident()
            if "'" in agent_id:
                self.error("agent identifiers cannot carry a freshness suffix")
            self.expect("(")
            params = self.name_list(")")
            self.expect(")")
            self.expect("=")
            defs.append((AgentDef(agent_id, tuple(params), self.process()), start))
        if not (self.tok.text == "main" and self.tok.kind == "kw"):
            self.error("expected 'agent' or 'main'")
        self.i += 1
        main = self.process()
        if self.tok.kind != "eof":
            self.error("unexpected input after main process")
        return defs, main

    def standalone(self) -> Process:
        p = self.process()
        if self.tok.kind != "eof":
            self.error("unexpected input after process")
        return p

    def name_list(self, closer: str) -> list[Name]:
        names = []
        if self.tok.text == closer:
            return names
        names.append(_name(self.ident()))
        while self.accept(","):
            names.append(_name(self.ident()))
        return names

    def process(self) -> Process:
        p = self.par()
        while self.accept("+"):
            p = Sum(p, self.par())
        return p

    def par(self) -> Process:
        p = self.prefix()
        while self.accept("|"):
            p = Par(p, self.prefix())
        return p

    def prefix(self) -> Process:
        tok = self.tok
        if tok.kind == "zero":
            self.i += 1
            return NIL
        if tok.kind == "kw" and tok.text == "tau":
            self.i += 1
            self.expect(".")
            return Tau(self.prefix())
        if tok.text == "(":
            if self.peek().kind == "kw" and self.peek().text == "new":
                self.i += 2
                x = _name(self.ident())
                self.expect(")")
                return Restrict(x, self.prefix())
            self.i += 1
            p = self.process()
            self.expect(")")
            return p
        if tok.text == "[":
            self.i += 1
            a = _name(self.ident())
            self.expect("=")
            b = _name(self.ident())
            self.expect("]")
            return Match(a, b, self.prefix())
        if tok.kind == "ident":
            self.i += 1
            head = tok.text
            if self.accept("<"):
                payload = None if self.tok.text == ">" else _name(self.ident())
                self.expect(">")
                self.expect(".")
                return Output(_name(head), payload, self.prefix())
            if self.accept("("):
                names = self.name_list(")")
                self.expect(")")
                if self.accept("."):
                    if len(names) > 1:
                        self.error("input prefixes bind at most one name", tok)
                    return Input(_name(head), names[0] if names else None, self.prefix())
                if "'" in head:
                    self.error("agent identifiers cannot carry a freshness suffix", tok)
                return Call(head, tuple(names))
            self.error(f"expected '<', '(' after {head!r}")
        self.error("expected a process")


def parse_process(text: str) -> Process:
    """Parse a bare process expression (no definitions, no checks)."""
    return _Parser(text).standalone()


def parse_program(text: str, *, stdlib: bool = True) -> PiProgram:
    """Parse and validate a program; the standard agents are preloaded."""
    from .encodings import stdlib as std_defs

    parser = _Parser(text)
    parsed, main = parser.program()
    defs: dict[str, AgentDef] = {}
    if stdlib:
        defs.update({d.id: d for d in std_defs()})
    user = []
    for d, tok in parsed:
        if d.id in defs:
            kind = "a reserved standard agent" if d.id not in user else "already defined"
            raise PiSyntaxError(f"agent {d.id} is {kind}", tok.line, tok.col)
        defs[d.id] = d
        user.append(d.id)
    check_program(defs, main)
    return PiProgram(defs, main, tuple(user))


_SUM, _PAR, _PREFIX = 0, 1, 2


def print_process(p: Process) -> str:
    """Canonical text for ``p``; ``parse_process`` reads it back."""
    return _show(p, _SUM)


def _wrap(text: str, own: int, ctx: int) -> str:
    return f"({text})" if own < ctx else text


def _show(p: Process, ctx: int) -> str:
    match p:
        case Nil():
            return "0"
        case Sum(l, r):
            return _wrap(f"{_show(l, _SUM)} + {_show(r, _PAR)}", _SUM, ctx)
        case Par(l, r):
            return _wrap(f"{_show(l, _PAR)} | {_show(r, _PREFIX)}", _PAR, ctx)
        case Output(c, y, k):
            return f"{c}<{'' if y is None else y}>.{_show(k, _PREFIX)}"
        case Input(c, x, k):
            return f"{c}({'' if x is None else x}).{_show(k, _PREFIX)}"
        case Tau(k):
            return f"tau.{_show(k, _PREFIX)}"
        case Restrict(x, k):
            return f"(new {x}) {_show(k, _PREFIX)}"
        case Match(a, b, k):
            return f"[{a}={b}] {_show(k, _PREFIX)}"
        case Call(a, args):
            return f"{a}({', '.join(str(n) for n in args)})"
    raise TypeError(f"not a process: {p!r}")


def print_program(prog: PiProgram) -> str:
    lines = []
    for agent_id in prog.user_defs:
        d = prog.defs[agent_id]
        params = ", ".join(str(n) for n in d.params)
        lines.append(f"agent {d.id}({params}) = {print_process(d.body)}")
    lines.append(f"main {print_process(prog.main)}")
    return "\n".join(lines) + "\n"
