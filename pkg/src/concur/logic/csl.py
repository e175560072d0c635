"""Concurrent separation logic on top of the Hoare kernel.

Adds the disjoint-parallel rule, the frame rule, the critical-region rule
with resource invariants, resource initialisation, race detection by
exhaustive interleaving, and the ownership-partition check.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .hoare import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    OutlineChecker,
    OutlineVerdict,
    _as_block,
)
from .lang import (
    TRUE,
    And,
    Assertion,
    Ccr,
    Command,
    Either,
    If,
    Par,
    Seq,
    Star,
    While,
    assertion_vars,
    children,
    cmd_vars,
    show_assertion,
    show_cmd,
    writes,
)
from .parser import ProofOutline, ResourceDecl
from .semantics import DONE, Env, Unit, explore
from .state import DEFAULT_FUEL, Domains, MachineState, footprints, heap_star, sat

__all__ = [
    "CslChecker",
    "OwnershipVerdict",
    "RaceReport",
    "check_outline_csl",
    "check_ownership_partition",
    "detect_race",
    "heap_star",
    "sat",
]

RECONSTRUCTED = (
    "critical-region rule reconstructed: {(P ** RI) && B} C {Q ** RI} gives {P} with r when B do C {Q}; "
    "disjoint-parallel side condition reconstructed as variable disjointness"
)


def _star_all(parts: list[Assertion]) -> Assertion:
    out = parts[0]
    for p in parts[1:]:
        out = Star(out, p)
    return out


class CslChecker(OutlineChecker):
    name = "check_outline_csl"

    def __init__(self, outline: ProofOutline, fuel: int = DEFAULT_FUEL):
        super().__init__(outline, fuel)
        self.notes.append(RECONSTRUCTED)
        self.owned = frozenset().union(*(r.owns for r in outline.resources.values()))

    def invariants(self) -> Assertion | None:
        ris = [r.invariant for _, r in sorted(self.o.resources.items())]
        return _star_all(ris) if ris else None

    def top_first_step(self, a: Assertion, b: Assertion, line) -> None:
        ri = self.invariants()
        if ri is None:
            super().top_first_step(a, b, line)
            return
        text = f"{show_assertion(a)} ==> ({show_assertion(b)}) ** resource invariants"
        self.entail("resource-initialization", line, a, Star(b, ri), text)

    def top_last_step(self, a: Assertion, b: Assertion, line) -> None:
        ri = self.invariants()
        if ri is None:
            super().top_last_step(a, b, line)
            return
        text = f"({show_assertion(a)}) ** resource invariants ==> {show_assertion(b)}"
        self.entail("resource-finalization", line, Star(a, ri), b, text)

    def par_rule_name(self, c: Par, pre: Assertion, post: Assertion) -> str:
        return c.meta.rule or "disjoint-parallel"

    def rule_par(self, c: Par, pre: Assertion, post: Assertion) -> None:
        if self.par_rule_name(c, pre, post) != "disjoint-parallel":
            super().rule_par(c, pre, post)
            return
        line = c.meta.line
        rule = "disjoint-parallel"
        if not isinstance(pre, Star) or not isinstance(post, Star):
            which = "precondition" if not isinstance(pre, Star) else "postcondition"
            self.record(
                rule, line, False,
                f"side condition: the {which} is not a separating conjunction, so the branches' heaps are not shown disjoint",
            )
            return
        b1, b2 = _as_block(c.left), _as_block(c.right)
        p1, p2, q1, q2 = pre.left, pre.right, post.left, post.right
        clashes = []
        for name, mine, other, oth_asserts in (("left", b1, b2, (p2, q2)), ("right", b2, b1, (p1, q1))):
            used = set(cmd_vars(other))
            for a in oth_asserts:
                used |= assertion_vars(a)
            for x in sorted((writes(mine) & used) - self.owned):
                clashes.append(f"variable {x} is modified by the {name} branch and used by the other")
        if clashes:
            self.record(rule, line, False, "side condition: " + "; ".join(clashes))
        else:
            self.record(rule, line, True, "side condition: branches are variable-disjoint")
        self.check_block(b1, p1, q1)
        self.check_block(b2, p2, q2)
        c.meta.branch_posts = (q1, q2)

    def rule_frame(self, c: Command, pre: Assertion, post: Assertion) -> None:
        line = c.meta.line
        if not isinstance(pre, Star) or not isinstance(post, Star) or pre.right != post.right:
            self.record("frame", line, False, "rule shape mismatch: frame needs {P ** R} C {Q ** R} with the same R")
            return
        frame = pre.right
        bad = sorted(writes(c) & assertion_vars(frame))
        if bad:
            self.record("frame", line, False, f"side condition: {show_cmd(c)} modifies {', '.join(bad)}, free in the frame")
            return
        self.record("frame", line, True, f"frame {show_assertion(frame)}")
        rule = c.meta.rule
        c.meta.rule = None
        try:
            self.check_cmd(c, pre.left, post.left)
        finally:
            c.meta.rule = rule
        c.meta.pre = pre

    def rule_ccr(self, c: Ccr, pre: Assertion, post: Assertion) -> None:
        line = c.meta.line
        decl = self.o.resources.get(c.resource)
        if decl is None:
            self.record("critical-region", line, False, f"undeclared resource {c.resource}")
            return
        ri = decl.invariant
        before = len(self.failures())
        self.check_block(_as_block(c.body), And(Star(pre, ri), c.guard), Star(post, ri))
        if len(self.failures()) > before:
            self.record(
                "critical-region", line, False,
                f"resource invariant of {c.resource} ({show_assertion(ri)}) is not re-established by the body",
            )
        else:
            self.record("critical-region", line, True, f"body preserves the invariant of {c.resource} (reconstructed rule)")

    def failures(self):
        return [o for o in self.obligations if o.status == "failed"]

    def extra_checks(self) -> None:
        for r in self.o.resources.values():
            outside = _outside_accesses(self.o.body, r)
            if outside:
                self.record(
                    "resource-ownership", None, False,
                    f"variables {', '.join(sorted(outside))} owned by {r.id} are used outside its critical regions",
                )


def _outside_accesses(c: Command, r: ResourceDecl) -> set[str]:
    match c:
        case Ccr(res, _, _) if res == r.id:
            return set()
        case If(b, _, _) | While(b, _, _) | Ccr(_, b, _):
            here = assertion_vars(b)
        case Seq() | Par() | Either():
            here = frozenset()
        case _:
            here = cmd_vars(c)
    out = set(here & r.owns)
    for k in children(c):
        out |= _outside_accesses(k, r)
    return out


def check_outline_csl(outline: ProofOutline, fuel: int = DEFAULT_FUEL) -> OutlineVerdict:
    return CslChecker(outline, fuel).run()


# -- race detection ---------------------------------------------------------------------


RACE_FREE = "race-free"
RACY = "racy"


def _concurrent(t1: tuple, t2: tuple) -> bool:
    n = min(len(t1), len(t2))
    return t1[:n] != t2[:n]


def _loc(loc) -> str:
    kind, where = loc
    return f"variable {where}" if kind == "var" else f"address {where}"


@dataclass
class RaceWitness:
    initial: MachineState
    prefix: list[str]
    first: str
    second: str
    location: str

    def render(self) -> dict:
        return {
            "initial": self.initial.render(),
            "prefix": self.prefix,
            "conflict": [self.first, self.second],
            "location": self.location,
        }


@dataclass
class RaceReport:
    verdict: str
    witness: RaceWitness | None = None
    classification: str | None = None
    shared: list[str] = field(default_factory=list)
    explored: int = 0

    @property
    def racy(self) -> bool:
        return self.verdict == RACY


def _conflict(u1: Unit, u2: Unit):
    if not _concurrent(u1.thread, u2.thread):
        return None
    if u1.region is not None and u1.region == u2.region:
        return None
    for loc in sorted((u1.writes & (u2.reads | u2.writes)) | (u2.writes & u1.reads), key=str):
        return loc
    return None


def detect_race(
    c: Command,
    init: Assertion,
    domains: Domains,
    fuel: int = DEFAULT_FUEL,
    assumed: Mapping | None = None,
) -> RaceReport:
    """Explore every interleaving from every state satisfying ``init``.

    Racy when two units of concurrent threads are enabled together and
    touch a common location, one of them writing, unless both are regions
    of the same resource.  Cautious when every access to a location shared
    between concurrent threads happens inside a region, daring otherwise.
    """
    env = Env(domains, assumed or {}, fuel)
    witness = None
    explored = 0
    inconclusive = False
    accesses: dict = {}
    for st in domains.states():
        if not sat(st, init):
            continue
        ex = explore(c, st, env)
        explored += len(ex.parent)
        inconclusive |= ex.inconclusive
        for config, out in ex.edges.items():
            units = [sp.unit for sp in out]
            for u in dict.fromkeys(units):
                for loc in u.reads | u.writes:
                    accesses.setdefault(loc, set()).add((u.thread, u.region))
            if witness is not None:
                continue
            for i, u1 in enumerate(units):
                for u2 in units[i + 1 :]:
                    loc = _conflict(u1, u2)
                    if loc is not None and witness is None:
                        prefix = [str(u) for u in ex.trace(config)]
                        witness = RaceWitness(st, prefix, str(u1), str(u2), _loc(loc))
    shared = []
    daring = False
    for loc, acc in sorted(accesses.items(), key=lambda kv: str(kv[0])):
        threads = {t for t, _ in acc}
        if any(_concurrent(a, b) for a in threads for b in threads):
            shared.append(_loc(loc))
            daring |= any(region is None for _, region in acc)
    classification = "daring" if daring else "cautious"
    if witness is not None:
        return RaceReport(RACY, witness, classification, shared, explored)
    if inconclusive:
        return RaceReport(INCONCLUSIVE, None, classification, shared, explored)
    return RaceReport(RACE_FREE, None, classification, shared, explored)


# -- ownership partition ------------------------------------------------------------------


@dataclass
class OwnershipVerdict:
    result: str
    points: int = 0
    owners: dict[int, list[str]] = field(default_factory=dict)
    failure: dict | None = None

    def __bool__(self) -> bool:
        return self.result == PASS


_SIDE = {"L": "left", "R": "right"}


def _thread_name(path: tuple) -> str:
    return ".".join(_SIDE[p] for p in path) or "main"


def _threads(cmd, path=()) -> list[tuple[str, Assertion | None]]:
    """Each thread of a residual command with the annotation in force for it."""
    match cmd:
        case None:
            return [(_thread_name(path), None)]
        case Seq(items) if items:
            return _threads(items[0], path)
        case Par(l, r) | Either(l, r):
            posts = cmd.meta.branch_posts or (None, None)
            out = []
            for side, branch, post in zip("LR", (l, r), posts):
                if branch is DONE:
                    out.append((_thread_name((*path, side)), post))
                else:
                    out += _threads(branch, (*path, side))
            return out
    ann = cmd.meta.pre if cmd.meta.pre is not None else (cmd.meta.ann[-1] if cmd.meta.ann else None)
    return [(_thread_name(path), ann)]


def _attribute(cmd, st: MachineState, resources: Mapping[str, ResourceDecl]) -> tuple[dict, str | None]:
    claims: dict[int, list[str]] = {a: [] for a, _ in st.heap}
    for rid in sorted(resources):
        feet = footprints(resources[rid].invariant, st)
        if len(feet) != 1:
            why = "does not hold" if not feet else "does not determine its cells"
            return claims, f"invariant of resource {rid} {why}"
        for a in feet[0]:
            claims[a].append(f"resource {rid}")
    threads = _threads(cmd)
    if len(threads) == 1:
        name = threads[0][0]
        for owners in claims.values():
            if not owners:
                owners.append(name)
        return claims, None
    for name, ann in threads:
        if ann is None:
            return claims, f"thread {name} has no annotation at this point"
        feet = footprints(ann, st)
        if len(feet) != 1:
            why = "does not hold" if not feet else "does not determine its cells"
            return claims, f"annotation {show_assertion(ann)} of thread {name} {why}"
        for a in feet[0]:
            claims[a].append(f"thread {name}")
    return claims, None


def _trespass(out, claims: dict, single: bool):
    """The first enabled heap access to a cell its thread does not own."""
    for sp in out:
        u = sp.unit
        name = _thread_name(u.thread)
        allowed = {name if single else f"thread {name}"}
        if u.region is not None:
            allowed.add(f"resource {u.region}")
        for kind, a in sorted(u.reads | u.writes, key=str):
            if kind != "heap":
                continue
            owner = claims.get(a, [])
            if not allowed & set(owner):
                held = " and ".join(owner) or "nobody"
                return (a, owner), f"{u} accesses cell {a}, owned by {held}"
    return None, None


def check_ownership_partition(
    c: Command,
    resources: Mapping[str, ResourceDecl],
    domains: Domains,
    init: Assertion = TRUE,
    fuel: int = DEFAULT_FUEL,
    assumed: Mapping | None = None,
) -> OwnershipVerdict:
    """At every reachable point, every heap cell has exactly one owner.

    A resource owns the cells its invariant describes; a thread owns the
    cells described by the annotation in force for it: the one derived by a
    prior run of the outline checker, else the one written before it.  Every
    enabled heap access must also touch only cells owned by its thread, or
    by the resource whose region performs it.
    """
    env = Env(domains, assumed or {}, fuel)
    points = 0
    owners: dict[int, set[str]] = {}
    inconclusive = False
    for st in domains.states():
        if not sat(st, init):
            continue
        ex = explore(c, st, env)
        inconclusive |= ex.inconclusive
        for config in ex.edges:
            cmd, s = config
            points += 1
            claims, problem = _attribute(cmd, s, resources)
            bad = None
            if problem is None:
                bad = next(((a, who) for a, who in sorted(claims.items()) if len(who) != 1), None)
                if bad is not None:
                    a, who = bad
                    problem = f"cell {a} is " + ("unowned" if not who else "claimed by " + " and ".join(who))
            if problem is None:
                bad, problem = _trespass(ex.edges[config], claims, len(_threads(cmd)) == 1)
            if problem is not None:
                failure = {
                    "message": problem,
                    "state": s.render(),
                    "trace": [str(u) for u in ex.trace(config)],
                }
                if bad is not None:
                    failure["cell"] = bad[0]
                return OwnershipVerdict(FAIL, points, {a: sorted(o) for a, o in owners.items()}, failure)
            for a, who in claims.items():
                owners.setdefault(a, set()).update(who)
    result = INCONCLUSIVE if inconclusive else PASS
    return OwnershipVerdict(result, points, {a: sorted(o) for a, o in sorted(owners.items())})
