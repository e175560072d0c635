"""Bounded Hoare-logic checks and the proof-outline checker.

Every semantic question is settled by enumeration over the finite
domains of a ``Domains`` object: entailment by checking all states,
triples by running ``eval`` from every state satisfying the precondition.
The outline checker walks the annotated command tree, applies the rule
matching each node, and records one obligation per premise.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .lang import (
    ATOMIC,
    And,
    Assertion,
    Assign,
    Call,
    Ccr,
    Command,
    Either,
    If,
    Load,
    Not,
    Num,
    Or,
    Par,
    SemPred,
    Seq,
    Skip,
    Store,
    While,
    assertion_vars,
    cmd_vars,
    heap_accesses,
    show_assertion,
    show_cmd,
    writes,
)
from .parser import ProofOutline
from .semantics import Env, Fault, eval_command, explore
from .state import DEFAULT_FUEL, Domains, DomainTooLarge, MachineState, sat

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


# -- entailment and triples -------------------------------------------------------


@dataclass
class Entailment:
    holds: bool
    counterexample: MachineState | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


def entails(a: Assertion, b: Assertion, domains: Domains) -> Entailment:
    """Does every state over ``domains`` satisfying ``a`` satisfy ``b``?

    Raises ``DomainTooLarge`` when the state space exceeds ``domains.cap``.
    """
    undeclared = (assertion_vars(a) | assertion_vars(b)) - set(domains.vars)
    if undeclared:
        raise ValueError(f"undeclared variables: {', '.join(sorted(undeclared))}")
    n = 0
    for st in domains.states():
        n += 1
        if sat(st, a) and not sat(st, b):
            return Entailment(False, st, n)
    return Entailment(True, None, n)


@dataclass
class TripleVerdict:
    result: str
    counterexample: MachineState | None = None
    final: MachineState | None = None
    trace: list[str] = field(default_factory=list)
    message: str = ""
    explored: int = 0

    def __bool__(self) -> bool:
        return self.result == PASS


def check_triple(
    pre: Assertion,
    c: Command,
    post: Assertion,
    domains: Domains,
    fuel: int = DEFAULT_FUEL,
    assumed: Mapping | None = None,
) -> TripleVerdict:
    """Bounded partial-correctness check of ``{pre} c {post}``."""
    env = Env(domains, assumed or {}, fuel)
    explored = 0
    inconclusive = None
    for st in domains.states():
        if not sat(st, pre):
            continue
        ex = explore(c, st, env)
        explored += len(ex.parent)
        for config, out in ex.edges.items():
            cmd, s = config
            for sp in out:
                if isinstance(sp.outcome, Fault):
                    trace = [str(u) for u in ex.trace(config)] + [str(sp.unit)]
                    return TripleVerdict(FAIL, st, None, trace, f"fault: {sp.outcome.message}", explored)
            if cmd is None and not sat(s, post):
                trace = [str(u) for u in ex.trace(config)]
                msg = f"final state {s} violates {show_assertion(post)}"
                return TripleVerdict(FAIL, st, s, trace, msg, explored)
        if ex.inconclusive and inconclusive is None:
            inconclusive = st
    if inconclusive is not None:
        msg = f"fuel of {fuel} configurations exhausted from {inconclusive}"
        return TripleVerdict(INCONCLUSIVE, inconclusive, message=msg, explored=explored)
    return TripleVerdict(PASS, explored=explored)


def wp(c: Command, post: Assertion, env: Env) -> SemPred:
    """Semantic weakest (liberal, fault-avoiding) precondition."""

    def fn(s, h) -> bool:
        res = eval_command(c, MachineState.of(s, h), env)
        return not res.faults and not res.inconclusive and all(sat(f, post) for f in res.finals)

    return SemPred(f"wp({show_cmd(c)}, {show_assertion(post)})", fn)


# -- disjointness and semicommutativity -------------------------------------------------


def interference(c1: Command, c2: Command) -> list[str]:
    """Reasons ``c1`` and ``c2`` are not syntactically disjoint."""
    out = []
    for x in sorted(writes(c1) & cmd_vars(c2)):
        out.append(f"variable {x} is written by the first command and used by the second")
    for x in sorted(writes(c2) & cmd_vars(c1)):
        if x not in writes(c1):
            out.append(f"variable {x} is written by the second command and used by the first")
    for k1, a1 in heap_accesses(c1):
        for k2, a2 in heap_accesses(c2):
            if k1 == "read" and k2 == "read":
                continue
            if isinstance(a1, Num) and isinstance(a2, Num):
                if a1.value == a2.value:
                    out.append(f"both commands access address {a1.value}, at least one writing")
            else:
                out.append("heap accesses with non-constant or unknown addresses may overlap")
    return list(dict.fromkeys(out))


def disjoint(c1: Command, c2: Command) -> bool:
    """Conservative syntactic disjointness."""
    return not interference(c1, c2)


@dataclass
class SemicommuteVerdict:
    result: str
    counterexamples: list[MachineState] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.result == PASS


def semicommutes(
    q1: Command, q2: Command, domains: Domains, fuel: int = DEFAULT_FUEL, assumed: Mapping | None = None
) -> SemicommuteVerdict:
    """``q2; q1`` refines ``q1; q2``: wherever the former terminates, the latter
    terminates with the same final states.  Every counterexample state is listed."""
    env = Env(domains, assumed or {}, fuel)
    bad = []
    for st in domains.states():
        left = eval_command(Seq((q2, q1)), st, env)
        if left.inconclusive:
            return SemicommuteVerdict(INCONCLUSIVE, [st])
        if not left.finals:
            continue
        right = eval_command(Seq((q1, q2)), st, env)
        if right.inconclusive or right.faults or right.deadlocks or right.finals != left.finals:
            bad.append(st)
    return SemicommuteVerdict(FAIL if bad else PASS, bad)


def commutes(q1: Command, q2: Command, domains: Domains, fuel: int = DEFAULT_FUEL) -> SemicommuteVerdict:
    a = semicommutes(q1, q2, domains, fuel)
    if a.result != PASS:
        return a
    return semicommutes(q2, q1, domains, fuel)


# -- outline checking ----------------------------------------------------------------------


DISCHARGED = "discharged"
FAILED = "failed"
WARNING = "warning"


@dataclass
class Obligation:
    rule: str
    line: int | None
    status: str
    message: str
    counterexample: dict | None = None

    def render(self) -> dict:
        out = {"rule": self.rule, "line": self.line, "status": self.status, "message": self.message}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class OutlineVerdict:
    result: str
    obligations: list[Obligation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.result == PASS

    @property
    def failures(self) -> list[Obligation]:
        return [o for o in self.obligations if o.status == FAILED]

    @property
    def warnings(self) -> list[Obligation]:
        return [o for o in self.obligations if o.status == WARNING]


_SIMPLE = (*ATOMIC, Call)
_ATOMIC_RULE = {Skip: "skip", Assign: "assignment", Load: "heap-load", Store: "heap-store"}


def _leading(block: Seq) -> tuple:
    return block.items[0].meta.ann


def _first_pre(block: Seq) -> Assertion | None:
    lead = _leading(block)
    return lead[0] if lead else None


def _last_post(block: Seq) -> Assertion | None:
    return block.meta.trailing[-1] if block.meta.trailing else None


def _as_block(c: Command) -> Seq:
    return c if isinstance(c, Seq) else Seq((c,))


class OutlineChecker:
    """Checks a proof outline rule by rule with the sequential rules and the
    parallel rules of the extended Hoare logic (asymmetric parallel, two-way
    communication, collusion)."""

    name = "check_outline"

    def __init__(self, outline: ProofOutline, fuel: int = DEFAULT_FUEL):
        self.o = outline
        self.domains = outline.domains
        self.fuel = fuel
        self.env = Env(outline.domains, outline.assumed, fuel)
        self.obligations: list[Obligation] = []
        self.notes: list[str] = []

    # -- recording -------------------------------------------------------------

    def record(self, rule, line, ok, message, cex=None) -> bool:
        status = DISCHARGED if ok is True else FAILED if ok is False else ok
        self.obligations.append(Obligation(rule, line, status, message, cex.render() if cex is not None else None))
        return ok is True

    def entail(self, rule: str, line, a: Assertion, b: Assertion, what: str | None = None) -> bool:
        text = what or f"{show_assertion(a)} ==> {show_assertion(b)}"
        try:
            r = entails(a, b, self.domains)
        except DomainTooLarge as err:
            return self.record(rule, line, INCONCLUSIVE, f"{text}: {err}")
        if r:
            return self.record(rule, line, True, text)
        return self.record(rule, line, False, f"{text} fails", r.counterexample)

    def triple(self, rule: str, line, pre: Assertion, c: Command, post: Assertion) -> bool:
        text = f"{{{show_assertion(pre)}}} {show_cmd(c)} {{{show_assertion(post)}}}"
        try:
            v = check_triple(pre, c, post, self.domains, self.fuel, self.o.assumed)
        except DomainTooLarge as err:
            return self.record(rule, line, INCONCLUSIVE, f"{text}: {err}")
        if v.result == PASS:
            return self.record(rule, line, True, text)
        if v.result == INCONCLUSIVE:
            return self.record(rule, line, INCONCLUSIVE, f"{text}: {v.message}")
        cex = {"initial": v.counterexample.render(), "trace": v.trace}
        if v.final is not None:
            cex["final"] = v.final.render()
        self.obligations.append(Obligation(rule, line, FAILED, f"{text}: {v.message}", cex))
        return False

    # -- driver ------------------------------------------------------------------

    def run(self) -> OutlineVerdict:
        body = self.o.body
        if self.o.pre is None or self.o.post is None or not _leading(body):
            self.record("outline", body.meta.line, False, "unannotated node: the program needs a precondition and a postcondition")
        else:
            self.check_block(body, None, None, top=True)
        self.extra_checks()
        statuses = {o.status for o in self.obligations}
        result = FAIL if FAILED in statuses else INCONCLUSIVE if INCONCLUSIVE in statuses else PASS
        return OutlineVerdict(result, self.obligations, self.notes)

    def extra_checks(self) -> None:
        pass

    # -- blocks ------------------------------------------------------------------

    def check_block(self, block: Seq, pre: Assertion | None, post: Assertion | None, top: bool = False) -> None:
        elems: list = []
        if pre is not None and (not _leading(block) or _leading(block)[0] != pre):
            elems.append(("a", pre, block.meta.line))
        for c in block.items:
            elems += [("a", a, c.meta.line) for a in c.meta.ann]
            elems.append(("c", c))
        elems += [("a", a, block.meta.line) for a in block.meta.trailing]
        if post is not None and (not block.meta.trailing or block.meta.trailing[-1] != post):
            elems.append(("a", post, block.meta.line))
        if elems[0][0] != "a":
            first = elems[0][1]
            self.record("outline", first.meta.line, False, f"unannotated node: no precondition for {show_cmd(first)}")
            return
        if elems[-1][0] != "a":
            last = elems[-1][1]
            self.record("outline", last.meta.line, False, f"unannotated node: no postcondition for {show_cmd(last)}")
            return
        block.meta.post = elems[-1][1]
        # split into (annotation, commands, annotation) transitions
        trans = []
        i = 0
        while i < len(elems) - 1:
            _, a, line = elems[i]
            j = i + 1
            run = []
            while elems[j][0] == "c":
                run.append(elems[j][1])
                j += 1
            trans.append((a, line, run, elems[j][1], elems[j][2]))
            i = j
        for k, (a, line, run, b, bline) in enumerate(trans):
            if top and k == 0:
                # the first step at the top links the global and local preconditions
                self.top_first_step(a, a if run else b, line)
                if not run:
                    continue
            if top and k == len(trans) - 1:
                self.top_last_step(b if run else a, b, bline)
                if not run:
                    continue
            if run:
                self.check_run(run, a, b)
            else:
                self.entail("consequence", line, a, b)

    def top_first_step(self, a: Assertion, b: Assertion, line) -> None:
        if a != b:
            self.entail("consequence", line, a, b)

    def top_last_step(self, a: Assertion, b: Assertion, line) -> None:
        if a != b:
            self.entail("consequence", line, a, b)

    def check_run(self, run: list[Command], pre: Assertion, post: Assertion) -> None:
        """A maximal run of commands between two annotations."""
        run[0].meta.pre = pre
        if all(isinstance(c, _SIMPLE) and c.meta.rule is None for c in run):
            if len(run) == 1:
                self.check_cmd(run[0], pre, post)
            else:
                self.triple("sequence", run[0].meta.line, pre, Seq(tuple(run)), post)
            return
        for k, c in enumerate(run):
            compound = not isinstance(c, _SIMPLE) or c.meta.rule is not None
            if not compound:
                continue
            if k > 0:
                self.record("outline", c.meta.line, False, f"unannotated node: {show_cmd(c)} needs a preceding annotation")
                return
            rest = run[1:]
            if any(not isinstance(r, _SIMPLE) or r.meta.rule is not None for r in rest):
                bad = next(r for r in rest if not isinstance(r, _SIMPLE) or r.meta.rule is not None)
                self.record("outline", bad.meta.line, False, f"unannotated node: {show_cmd(bad)} needs a preceding annotation")
                return
            mid = wp(Seq(tuple(rest)), post, self.env) if rest else post
            if rest:
                rest[0].meta.pre = mid
            self.check_cmd(c, pre, mid)
            return

    # -- rules -------------------------------------------------------------------

    def check_cmd(self, c: Command, pre: Assertion, post: Assertion) -> None:
        c.meta.pre = pre
        if c.meta.rule == "frame":
            self.rule_frame(c, pre, post)
            return
        match c:
            case Skip() | Assign() | Load() | Store():
                self.triple(_ATOMIC_RULE[type(c)], c.meta.line, pre, c, post)
            case Call(name):
                t = self.o.assumed[name]
                line = c.meta.line
                self.entail("assumed", line, pre, t.pre, f"{show_assertion(pre)} ==> pre of {name}")
                self.entail("assumed", line, t.post, post, f"post of {name} ==> {show_assertion(post)}")
            case Seq():
                self.check_block(c, pre, post)
            case If(b, t, e):
                self.record("if", c.meta.line, True, f"if {show_assertion(b)}: both branches checked below")
                self.check_block(_as_block(t), And(pre, b), post)
                self.check_block(_as_block(e), And(pre, Not(b)), post)
            case While(b, body, inv):
                i = pre if inv is None else inv
                if inv is not None:
                    self.entail("consequence", c.meta.line, pre, inv)
                self.record("while", c.meta.line, True, f"invariant {show_assertion(i)}; postcondition {show_assertion(And(i, Not(b)))}")
                self.check_block(_as_block(body), And(i, b), i)
                self.entail("consequence", c.meta.line, And(i, Not(b)), post)
            case Par():
                self.rule_par(c, pre, post)
            case Either():
                self.rule_collusion(c, pre, post)
            case Ccr():
                self.rule_ccr(c, pre, post)
            case _:
                raise TypeError(f"not a command: {c!r}")

    def par_rule_name(self, c: Par, pre: Assertion, post: Assertion) -> str:
        hint = c.meta.rule
        if hint in ("asymmetric", "two-way", "disjoint-parallel"):
            return hint
        if hint is not None:
            return hint
        return "two-way" if self.two_way_shape(c, pre, post) is None else "asymmetric"

    def rule_par(self, c: Par, pre: Assertion, post: Assertion) -> None:
        rule = self.par_rule_name(c, pre, post)
        if rule == "asymmetric":
            self.rule_asymmetric(c, pre, post)
        elif rule == "two-way":
            self.rule_two_way(c, pre, post)
        elif rule == "disjoint-parallel":
            self.record(rule, c.meta.line, False, "the disjoint-parallel rule belongs to check_outline_csl")
        else:
            self.record("outline", c.meta.line, False, f"rule shape mismatch: unknown rule {rule!r} for par")

    def rule_asymmetric(self, c: Par, pre: Assertion, post: Assertion) -> None:
        b1, b2 = _as_block(c.left), _as_block(c.right)
        reasons = interference(b1, b2)
        line = c.meta.line
        if reasons:
            self.record("asymmetric-parallel", line, False, "side condition: not disjoint: " + "; ".join(reasons))
        else:
            self.record("asymmetric-parallel", line, True, "side condition: branches are disjoint")
        s = _last_post(b1) or _first_pre(b2)
        if s is None:
            self.record("asymmetric-parallel", line, False, "rule shape mismatch: the intermediate assertion S is missing")
            return
        self.check_block(b1, pre, s)
        self.check_block(b2, s, post)
        c.meta.branch_posts = (b1.meta.post, b2.meta.post)

    def two_way_shape(self, c: Par, pre: Assertion, post: Assertion) -> str | None:
        """None when the node matches the printed two-way shape, else the mismatch."""
        b1, b2 = _as_block(c.left), _as_block(c.right)
        pre1, post1, pre2, post2 = _first_pre(b1), _last_post(b1), _first_pre(b2), _last_post(b2)
        if not isinstance(pre, And) or not isinstance(post, And):
            return "conclusion must read {P1 && P2} Q1 // Q2 {R1 && R2}"
        p1, p2 = pre.left, pre.right
        r1, r2 = post.left, post.right
        for label, a in (("first premise precondition", pre1), ("first premise postcondition", post1),
                         ("second premise precondition", pre2), ("second premise postcondition", post2)):
            if not isinstance(a, And):
                return f"{label} must be a conjunction"
        s1 = pre1.right
        checks = [
            (pre1.left == p1, "first premise precondition must be P1 && S1"),
            (post1.left == s1 and post1.right == r1, "first premise postcondition must be S1 && R1"),
            (pre2.left == p2 and pre2.right == s1, "second premise precondition must be P2 && S1"),
            (post2.right == r2, "second premise postcondition must be S2 && R2"),
        ]
        for ok, msg in checks:
            if not ok:
                return msg
        return None

    def rule_two_way(self, c: Par, pre: Assertion, post: Assertion) -> None:
        line = c.meta.line
        mismatch = self.two_way_shape(c, pre, post)
        if mismatch is not None:
            self.record("two-way", line, False, f"rule shape mismatch: {mismatch}")
            return
        self.record("two-way", line, True, "premise and conclusion shapes match the rule as printed")
        self.record(
            "two-way", line, WARNING,
            "rule checked exactly as printed: S2 is not connected to the conclusion and S1 is not implied by the precondition",
        )
        b1, b2 = _as_block(c.left), _as_block(c.right)
        self.check_block(b1, None, None)
        self.check_block(b2, None, None)
        c.meta.branch_posts = (b1.meta.post, b2.meta.post)

    def rule_collusion(self, c: Either, pre: Assertion, post: Assertion) -> None:
        b1, b2 = _as_block(c.left), _as_block(c.right)
        line = c.meta.line
        p1, p2 = _first_pre(b1) or pre, _first_pre(b2) or pre
        r1, r2 = _last_post(b1) or post, _last_post(b2) or post
        self.record("collusion", line, True, f"concludes {show_assertion(Or(r1, r2))}")
        if p1 is not pre or p2 is not pre:
            self.entail("collusion", line, pre, And(p1, p2))
        self.check_block(b1, p1, r1)
        self.check_block(b2, p2, r2)
        if r1 is not post or r2 is not post:
            self.entail("collusion", line, Or(r1, r2), post)
        reasons = interference(b1, b2)
        if reasons:
            self.record("collusion", line, WARNING, "branches interfere (" + "; ".join(reasons) + "); the rule as printed has no side condition")
        c.meta.branch_posts = (r1, r2)

    def rule_ccr(self, c: Ccr, pre: Assertion, post: Assertion) -> None:
        self.record("critical-region", c.meta.line, False, "no rule for critical regions in check_outline; use check_outline_csl")

    def rule_frame(self, c: Command, pre: Assertion, post: Assertion) -> None:
        self.record("frame", c.meta.line, False, "the frame rule belongs to check_outline_csl")


def check_outline(outline: ProofOutline, fuel: int = DEFAULT_FUEL) -> OutlineVerdict:
    return OutlineChecker(outline, fuel).run()


def root_triple(outline: ProofOutline, fuel: int = DEFAULT_FUEL) -> TripleVerdict:
    """Semantic check of the outline's root triple."""
    return check_triple(outline.pre, outline.body, outline.post, outline.domains, fuel, outline.assumed)
