"""Reader for proof-outline files (``.outline``).

A file is a list of declarations followed by an annotated command list::

    var x, y in 0..7;
    heap 10..11 in 0..7;
    resource r invariant { r = 1 && 10 |-> _ || r = 0 && emp } owns r;
    assume { array(0, 1) } ms_left { sorted(0, 1) };

    { x = 0 }
    while x < 3 inv { x <= 3 } do { x := x + 1 }
    { x = 3 }

Braces in command position are annotations; braces after a keyword are
blocks.  ``rule: name`` names the rule for the next command.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .lang import (
    PREDICATES,
    And,
    Assertion,
    Assign,
    BinOp,
    BoolLit,
    Call,
    Ccr,
    Cmp,
    Command,
    Either,
    Emp,
    Expr,
    If,
    Implies,
    Load,
    Meta,
    Neg,
    Not,
    Num,
    Or,
    Par,
    PointsTo,
    Pred,
    Seq,
    Skip,
    Star,
    Store,
    Var,
    While,
    assertion_vars,
    cmd_vars,
    is_pure,
    semaphore_p,
    semaphore_v,
    walk,
)
from .state import ADDRESS_RANGE, DEFAULT_DOMAIN, Domains, addresses_in, holds


class OutlineSyntaxError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


class OutlineError(Exception):
    """A well-formed file that violates a load-time check."""


@dataclass(frozen=True)
class ResourceDecl:
    id: str
    invariant: Assertion
    owns: frozenset[str] = frozenset()


@dataclass(frozen=True)
class AssumedTriple:
    name: str
    pre: Assertion
    post: Assertion


@dataclass
class ProofOutline:
    body: Seq
    domains: Domains
    resources: dict[str, ResourceDecl] = field(default_factory=dict)
    assumed: dict[str, AssumedTriple] = field(default_factory=dict)
    uses_heap: bool = False

    @property
    def pre(self) -> Assertion | None:
        return _leading(self.body)[0] if _leading(self.body) else None

    @property
    def post(self) -> Assertion | None:
        return self.body.meta.trailing[-1] if self.body.meta.trailing else None

    @property
    def csl(self) -> bool:
        return self.uses_heap or bool(self.resources)


def _leading(block: Seq) -> tuple:
    return block.items[0].meta.ann if block.items else block.meta.trailing


_ALIASES = {"∧": "&&", "∨": "||", "¬": "!", "⇒": "==>", "∗": "**", "↦": "|->", "≤": "<=", "≥": ">=", "≠": "!=", "==": "="}
_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
      | (?P<int>\d+)
      | (?P<id>[A-Za-z][A-Za-z0-9_]*)
      | (?P<op>==>|\|->|\*\*|&&|\|\||:=|\.\.|<=|>=|!=|==|[=<>!+\-*/%(){}\[\],;:_]|[∧∨¬⇒∗↦≤≥≠])
    """,
    re.VERBOSE,
)
_KEYWORDS = {
    "var", "heap", "in", "resource", "invariant", "owns", "assume", "skip", "if", "then", "else",
    "while", "inv", "do", "par", "or", "with", "when", "call", "rule", "true", "false", "emp",
}


@dataclass(frozen=True)
class _Tok:
    kind: str  # int, id, kw, op, eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out, pos, line, start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise OutlineSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind, val = m.lastgroup, m.group()
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            if kind == "op":
                val = _ALIASES.get(val, val)
            elif kind == "id" and val in _KEYWORDS:
                kind = "kw"
            out.append(_Tok(kind, val, line, pos - start + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def error(self, msg: str):
        raise OutlineSyntaxError(msg, self.tok.line, self.tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.tok
        if (text is not None and not self.at(text)) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            self.error(f"expected {want}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def integer(self) -> int:
        neg = self.accept("-")
        v = int(self.take(kind="int").text)
        return -v if neg else v

    def ident(self) -> str:
        return self.take(kind="id").text

    def idents(self) -> list[str]:
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        return names

    # -- expressions ---------------------------------------------------------

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.text in ("*", "/", "%") and self.tok.kind == "op":
            op = self.take().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Num(int(t.text))
        if t.kind == "id":
            self.i += 1
            return Var(t.text)
        if self.accept("-"):
            f = self.factor()
            return Num(-f.value) if isinstance(f, Num) else Neg(f)
        if self.accept("("):
            e = self.expr()
            self.take(")")
            return e
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    # -- assertions ------------------------------------------------------------

    def assertion(self) -> Assertion:
        a = self.disj()
        if self.accept("==>"):
            return Implies(a, self.assertion())
        return a

    def disj(self) -> Assertion:
        a = self.conj()
        while self.accept("||"):
            a = Or(a, self.conj())
        return a

    def conj(self) -> Assertion:
        a = self.sep()
        while self.accept("&&"):
            a = And(a, self.sep())
        return a

    def sep(self) -> Assertion:
        a = self.unary()
        while self.accept("**"):
            a = Star(a, self.unary())
        return a

    def unary(self) -> Assertion:
        if self.accept("!"):
            return Not(self.unary())
        t = self.tok
        if t.kind == "kw" and t.text in ("true", "false"):
            self.i += 1
            return BoolLit(t.text == "true")
        if self.accept("emp"):
            return Emp()
        if t.kind == "id" and t.text in PREDICATES and self.toks[self.i + 1].text == "(":
            self.i += 2
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.take(")")
            if len(args) != PREDICATES[t.text]:
                raise OutlineSyntaxError(f"{t.text} takes {PREDICATES[t.text]} arguments", t.line, t.col)
            return Pred(t.text, tuple(args))
        if self.at("("):
            # either a parenthesised assertion or an expression in parentheses
            save = self.i
            self.i += 1
            try:
                a = self.assertion()
                self.take(")")
                if self.tok.text not in ("=", "!=", "<", "<=", ">", ">=", "|->", "+", "-", "*", "/", "%"):
                    return a
            except OutlineSyntaxError:
                pass
            self.i = save
        lhs = self.expr()
        if self.accept("|->"):
            if self.accept("_"):
                return PointsTo(lhs, None)
            return PointsTo(lhs, self.expr())
        op = self.tok.text
        if op in ("=", "!=", "<", "<=", ">", ">=") and self.tok.kind == "op":
            self.i += 1
            return Cmp(op, lhs, self.expr())
        self.error(f"expected a comparison or '|->', found {self.tok.text or 'end of input'!r}")

    def annotation(self) -> Assertion:
        self.take("{")
        a = self.assertion()
        self.take("}")
        return a

    def guard(self) -> Assertion:
        t = self.tok
        b = self.assertion()
        if not is_pure(b):
            raise OutlineSyntaxError("conditions must be pure (no heap atoms)", t.line, t.col)
        return b

    # -- commands ----------------------------------------------------------------

    def block(self) -> Seq:
        self.take("{")
        b = self.items(closing="}")
        self.take("}")
        return b

    def items(self, closing: str) -> Seq:
        cmds: list[Command] = []
        pending: list[Assertion] = []
        rule = None
        while not (self.at(closing) if closing else self.tok.kind == "eof"):
            if self.at("{"):
                pending.append(self.annotation())
                continue
            if self.accept("rule"):
                self.take(":")
                rule = self.take(kind="id").text
                while self.at("-") and self.toks[self.i + 1].kind == "id":
                    self.i += 1
                    rule += "-" + self.take(kind="id").text
                continue
            line = self.tok.line
            c = self.command()
            c.meta.line = line
            c.meta.ann = tuple(pending)
            c.meta.rule = rule
            pending, rule = [], None
            cmds.append(c)
            self.accept(";")
        if rule is not None:
            self.error("rule hint without a following command")
        if not cmds:
            cmds.append(Skip(meta=Meta(line=self.tok.line, ann=tuple(pending))))
            pending = []
        return Seq(tuple(cmds), meta=Meta(trailing=tuple(pending), line=cmds[0].meta.line))

    def command(self) -> Command:
        t = self.tok
        if self.accept("skip"):
            return Skip()
        if self.accept("if"):
            b = self.guard()
            self.take("then")
            then = self.block()
            else_ = self.block() if self.accept("else") else Seq((Skip(),))
            return If(b, then, else_)
        if self.accept("while"):
            b = self.guard()
            inv = self.annotation() if self.accept("inv") else None
            self.take("do")
            return While(b, self.block(), inv)
        if self.accept("par") or self.accept("or"):
            kind = Par if self.toks[self.i - 1].text == "par" else Either
            left, right = self.block(), self.block()
            posts = tuple(b.meta.trailing[-1] if b.meta.trailing else None for b in (left, right))
            return kind(left, right, meta=Meta(branch_posts=posts))
        if self.accept("with"):
            res = self.ident()
            self.take("when")
            b = self.guard()
            self.accept("do")
            return Ccr(res, b, self.block())
        if self.accept("call"):
            return Call(self.ident())
        if self.at("["):
            self.take("[")
            addr = self.expr()
            self.take("]")
            self.take(":=")
            return Store(addr, self.expr())
        if t.kind == "id":
            nxt = self.toks[self.i + 1]
            if t.text in ("P", "V") and nxt.text == "(":
                self.i += 2
                s = self.ident()
                self.take(")")
                return semaphore_p(s) if t.text == "P" else semaphore_v(s)
            self.i += 1
            self.take(":=")
            if self.accept("["):
                addr = self.expr()
                self.take("]")
                return Load(t.text, addr)
            return Assign(t.text, self.expr())
        self.error(f"expected a command, found {t.text or 'end of input'!r}")

    # -- declarations --------------------------------------------------------------

    def outline(self, default_domain, address_range) -> ProofOutline:
        var_decls: dict[str, tuple[int, int]] = {}
        heap_decl = None
        resources: dict[str, ResourceDecl] = {}
        assumed: dict[str, AssumedTriple] = {}
        while True:
            t = self.tok
            if self.accept("var"):
                names = self.idents()
                self.take("in")
                lo = self.integer()
                self.take("..")
                hi = self.integer()
                if lo > hi:
                    raise OutlineSyntaxError("empty range", t.line, t.col)
                for x in names:
                    var_decls[x] = (lo, hi)
            elif self.accept("heap"):
                a = self.integer()
                self.take("..")
                b = self.integer()
                vals = default_domain
                if self.accept("in"):
                    lo = self.integer()
                    self.take("..")
                    vals = (lo, self.integer())
                if not (address_range[0] <= a <= b <= address_range[1]):
                    raise OutlineSyntaxError(
                        f"heap addresses must lie within {address_range[0]}..{address_range[1]}", t.line, t.col
                    )
                heap_decl = (tuple(range(a, b + 1)), vals)
            elif self.accept("resource"):
                rid = self.ident()
                self.take("invariant")
                inv = self.annotation()
                owns = frozenset(self.idents()) if self.accept("owns") else frozenset()
                resources[rid] = ResourceDecl(rid, inv, owns)
            elif self.accept("assume"):
                pre = self.annotation()
                name = self.ident()
                assumed[name] = AssumedTriple(name, pre, self.annotation())
            else:
                break
            self.take(";")
        body = self.items(closing="")
        return _finish(body, var_decls, heap_decl, resources, assumed, default_domain, address_range)


def _annotations(c: Command):
    yield from c.meta.ann
    yield from c.meta.trailing
    match c:
        case If(b, _, _) | Ccr(_, b, _):
            yield b
        case While(b, _, inv):
            yield b
            if inv is not None:
                yield inv


def _finish(body, var_decls, heap_decl, resources, assumed, default_domain, address_range) -> ProofOutline:
    assertions = [a for c in walk(body) for a in _annotations(c)]
    assertions += [r.invariant for r in resources.values()]
    assertions += [x for t in assumed.values() for x in (t.pre, t.post)]
    names = set(cmd_vars(body))
    for a in assertions:
        names |= assertion_vars(a)
    domains = Domains({x: var_decls.get(x, default_domain) for x in sorted(names | set(var_decls))})
    uses_heap = heap_decl is not None or any(isinstance(c, (Load, Store, Call)) for c in walk(body))
    if heap_decl is not None:
        domains.heap_addrs, domains.heap_values = heap_decl
    else:
        addrs = set()
        for a in assertions:
            addrs |= addresses_in(a)
        for c in walk(body):
            if isinstance(c, (Load, Store)):
                addr = c.addr
                if isinstance(addr, Num):
                    addrs.add(addr.value)
        bad = [a for a in addrs if not address_range[0] <= a <= address_range[1]]
        if bad:
            raise OutlineError(f"address {bad[0]} outside {address_range[0]}..{address_range[1]}")
        domains.heap_addrs = tuple(sorted(addrs))
        domains.heap_values = default_domain
        uses_heap = uses_heap or bool(addrs)
    for c in walk(body):
        if isinstance(c, Ccr):
            for inner in walk(c.body):
                if isinstance(inner, Ccr) and inner.resource == c.resource:
                    raise OutlineError(f"line {inner.meta.line}: nested region on resource {c.resource}")
        if isinstance(c, Call) and c.name not in assumed:
            raise OutlineError(f"line {c.meta.line}: call to {c.name} has no assumed triple")
    for r in resources.values():
        if not any(holds(r.invariant, st.s, st.h) for st in domains.states()):
            raise OutlineError(f"invariant of resource {r.id} is unsatisfiable over the declared domains")
    return ProofOutline(body, domains, resources, assumed, uses_heap)


def parse_outline(
    text: str,
    *,
    default_domain: tuple[int, int] = DEFAULT_DOMAIN,
    address_range: tuple[int, int] = ADDRESS_RANGE,
) -> ProofOutline:
    """Parse and load-check an outline; undeclared variables get ``default_domain``."""
    return _Parser(text).outline(default_domain, address_range)


def parse_assertion(text: str) -> Assertion:
    p = _Parser(text)
    a = p.assertion()
    p.take(kind="eof")
    return a


def parse_command(text: str) -> Command:
    """Parse a bare command list (annotations allowed) into a command."""
    p = _Parser(text)
    body = p.items(closing="")
    return body.items[0] if len(body.items) == 1 and not body.meta.trailing else body


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.take(kind="eof")
    return e
