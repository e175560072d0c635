"""Resource algebras: partial commutative monoids with a validity predicate.

Composition is total on a carrier extended with a single absorbing
``INVALID`` element: whenever a raw composite fails its algebra's validity
predicate it collapses to ``INVALID``.  The bundled algebras are natural
numbers under addition, strings under concatenation, exclusive ownership,
fractional permissions, products, the authoritative construction, and
heaps under disjoint union.
"""

from __future__ import annotations

import itertools
import random
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction

from .logic.hoare import FAIL, PASS, check_triple
from .logic.lang import ATOMIC, Assertion, Command, Seq, Star, show_assertion, show_cmd
from .logic.state import DEFAULT_FUEL, Domains, heap_star


class _Invalid:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INVALID"


INVALID = _Invalid()


class AlgebraMismatch(TypeError):
    """Elements from different algebras were composed (a usage error)."""


# -- elements -------------------------------------------------------------------


@dataclass(frozen=True)
class Nat:
    n: int


@dataclass(frozen=True)
class Str:
    s: str


@dataclass(frozen=True)
class Ex:
    value: object


@dataclass(frozen=True)
class Frac:
    q: Fraction

    @staticmethod
    def of(num: int, den: int) -> Frac:
        if den <= 0:
            raise ValueError("denominator must be positive")
        return Frac(Fraction(num, den))


@dataclass(frozen=True)
class Pair:
    left: object
    right: object


@dataclass(frozen=True)
class Auth:
    full: object | None
    frag: object


@dataclass(frozen=True)
class HeapEl:
    cells: tuple[tuple[int, int], ...]

    @staticmethod
    def of(cells: dict[int, int]) -> HeapEl:
        return HeapEl(tuple(sorted(cells.items())))


# -- algebras ---------------------------------------------------------------------


class ResourceAlgebra:
    """Base class; subclasses supply ``op``, ``valid``, ``carrier`` and syntax."""

    name = "ra"
    commutative = True
    kind: type = object

    @property
    def unit(self):
        return None

    def op(self, a, b):
        raise NotImplementedError

    def valid(self, a) -> bool:
        raise NotImplementedError

    def carrier(self) -> list:
        raise NotImplementedError

    def member(self, a) -> bool:
        return isinstance(a, self.kind)

    def parse(self, text: str):
        raise NotImplementedError

    def show(self, a) -> str:
        raise NotImplementedError

    def compose(self, a, b):
        for x in (a, b):
            if x is not INVALID and not self.member(x):
                raise AlgebraMismatch(f"{x!r} is not an element of {self.name}")
        if a is INVALID or b is INVALID:
            return INVALID
        r = self.op(a, b)
        return r if r is not INVALID and self.valid(r) else INVALID

    def render(self, a) -> str:
        return "invalid" if a is INVALID else self.show(a)


class NatRA(ResourceAlgebra):
    kind = Nat

    def __init__(self, hi: int = 20):
        self.hi = hi
        self.name = "nat"

    unit = Nat(0)

    def op(self, a, b):
        return Nat(a.n + b.n)

    def valid(self, a) -> bool:
        return a.n >= 0

    def carrier(self) -> list:
        return [Nat(i) for i in range(self.hi + 1)]

    def parse(self, text):
        return Nat(int(text))

    def show(self, a):
        return str(a.n)


class StrRA(ResourceAlgebra):
    """Strings under concatenation: a monoid, but not commutative."""

    kind = Str
    commutative = False
    unit = Str("")

    def __init__(self, alphabet: str = "ab", max_len: int = 3):
        self.alphabet = alphabet
        self.max_len = max_len
        self.name = "str"

    def op(self, a, b):
        return Str(a.s + b.s)

    def valid(self, a) -> bool:
        return True

    def carrier(self) -> list:
        return [Str("".join(p)) for k in range(self.max_len + 1) for p in itertools.product(self.alphabet, repeat=k)]

    def parse(self, text):
        return Str("" if text in ('""', "eps", "ε") else text)

    def show(self, a):
        return a.s or '""'


class ExclusiveRA(ResourceAlgebra):
    """Exclusive ownership: any two elements are incompatible; no unit."""

    kind = Ex

    def __init__(self, values: Iterable = ("a", "b")):
        self.values = tuple(values)
        self.name = "excl"

    def op(self, a, b):
        return INVALID

    def valid(self, a) -> bool:
        return True

    def carrier(self) -> list:
        return [Ex(v) for v in self.values]

    def parse(self, text):
        return Ex(text)

    def show(self, a):
        return f"ex({a.value})"


class FracRA(ResourceAlgebra):
    """Fractional permissions in (0, 1] under addition; no unit."""

    kind = Frac

    def __init__(self, den: int = 8):
        self.den = den
        self.name = "frac"

    def op(self, a, b):
        return Frac(a.q + b.q)

    def valid(self, a) -> bool:
        return 0 < a.q <= 1

    def carrier(self) -> list:
        return [Frac(Fraction(k, self.den)) for k in range(1, self.den + 1)]

    def parse(self, text):
        return Frac(Fraction(text))

    def show(self, a):
        return str(a.q)


class PairRA(ResourceAlgebra):
    kind = Pair

    def __init__(self, left: ResourceAlgebra, right: ResourceAlgebra):
        self.l, self.r = left, right
        self.name = f"pair({left.name},{right.name})"
        self.commutative = left.commutative and right.commutative

    @property
    def unit(self):
        if self.l.unit is None or self.r.unit is None:
            return None
        return Pair(self.l.unit, self.r.unit)

    def member(self, a) -> bool:
        return (
            isinstance(a, Pair)
            and (a.left is INVALID or self.l.member(a.left))
            and (a.right is INVALID or self.r.member(a.right))
        )

    def op(self, a, b):
        return Pair(self.l.compose(a.left, b.left), self.r.compose(a.right, b.right))

    def valid(self, a) -> bool:
        return (
            a.left is not INVALID
            and a.right is not INVALID
            and self.l.valid(a.left)
            and self.r.valid(a.right)
        )

    def carrier(self) -> list:
        return [Pair(x, y) for x in self.l.carrier() for y in self.r.carrier()]

    def parse(self, text):
        m = re.fullmatch(r"\(\s*(.*?)\s*,\s*(.*?)\s*\)", text.strip())
        if not m:
            raise ValueError(f"expected (left, right), got {text!r}")
        return Pair(self.l.parse(m.group(1)), self.r.parse(m.group(2)))

    def show(self, a):
        return f"({self.l.render(a.left)}, {self.r.render(a.right)})"


class AuthRA(ResourceAlgebra):
    """Authoritative construction: at most one full element, fragments that
    compose in the underlying algebra and must be included in the full one."""

    kind = Auth

    def __init__(self, under: ResourceAlgebra, fulls: Iterable | None = None):
        self.u = under
        self.fulls = list(fulls) if fulls is not None else under.carrier()
        self.name = f"auth({under.name})"
        self.commutative = under.commutative

    @property
    def unit(self):
        return None if self.u.unit is None else Auth(None, self.u.unit)

    def member(self, a) -> bool:
        return isinstance(a, Auth) and (a.full is None or self.u.member(a.full)) and (
            a.frag is INVALID or self.u.member(a.frag)
        )

    def op(self, a, b):
        if a.full is not None and b.full is not None:
            return INVALID
        return Auth(a.full if a.full is not None else b.full, self.u.compose(a.frag, b.frag))

    def valid(self, a) -> bool:
        if a.frag is INVALID or not self.u.valid(a.frag):
            return False
        if a.full is None:
            return True
        return self.u.valid(a.full) and auth_ok(a.full, a.frag, self.u)

    def carrier(self) -> list:
        out = []
        for full in [None, *self.fulls]:
            for frag in self.u.carrier():
                el = Auth(full, frag)
                if self.valid(el):
                    out.append(el)
        return out

    def parse(self, text):
        text = text.strip()
        m = re.fullmatch(r"auth\(\s*(.*?)\s*,\s*(.*?)\s*\)", text)
        if m:
            return Auth(self.u.parse(m.group(1)), self.u.parse(m.group(2)))
        m = re.fullmatch(r"frag\(\s*(.*?)\s*\)", text)
        if m:
            return Auth(None, self.u.parse(m.group(1)))
        raise ValueError(f"expected auth(full, frag) or frag(x), got {text!r}")

    def show(self, a):
        frag = self.u.render(a.frag)
        return f"frag({frag})" if a.full is None else f"auth({self.u.render(a.full)}, {frag})"


class HeapRA(ResourceAlgebra):
    """Heaps under disjoint union, with the empty heap as unit."""

    kind = HeapEl
    unit = HeapEl(())

    def __init__(self, addrs: Iterable[int] = (10, 11), values: Iterable[int] = (0, 1)):
        self.addrs = tuple(addrs)
        self.values = tuple(values)
        self.name = "heap"

    def op(self, a, b):
        h = heap_star(dict(a.cells), dict(b.cells))
        return INVALID if h is None else HeapEl.of(h)

    def valid(self, a) -> bool:
        return True

    def carrier(self) -> list:
        out = []
        for vals in itertools.product([None, *self.values], repeat=len(self.addrs)):
            out.append(HeapEl.of({a: v for a, v in zip(self.addrs, vals) if v is not None}))
        return out

    def parse(self, text):
        body = text.strip().strip("{}").strip()
        cells = {}
        for part in filter(None, (p.strip() for p in body.split(","))):
            a, v = re.split(r"\s*(?::|->|↦)\s*", part)
            cells[int(a)] = int(v)
        return HeapEl.of(cells)

    def show(self, a):
        return "{" + ", ".join(f"{k}->{v}" for k, v in a.cells) + "}"


def auth_ok(full, fragment, underlying: ResourceAlgebra) -> bool:
    """Is ``fragment`` included in ``full``: equal to it, or completed to it
    by some element of the underlying carrier?"""
    if fragment == full or fragment == underlying.unit:
        return True
    return any(underlying.compose(fragment, c) == full for c in underlying.carrier())


def algebras() -> dict[str, ResourceAlgebra]:
    """The bundled algebras with the carriers used by the law suite."""
    return {
        "nat": NatRA(20),
        "str": StrRA("ab", 3),
        "excl": ExclusiveRA(("a", "b")),
        "frac": FracRA(8),
        "pair": PairRA(ExclusiveRA(("a", "b")), FracRA(8)),
        "auth": AuthRA(NatRA(3)),
        "heap": HeapRA((10, 11), (0, 1)),
    }


# -- law checking ---------------------------------------------------------------------


@dataclass
class LawResult:
    status: str  # pass | fail | n/a
    checked: int = 0
    counterexample: tuple | None = None
    note: str = ""


@dataclass
class LawReport:
    algebra: str
    exhaustive: bool
    carrier_size: int
    laws: dict[str, LawResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.status != FAIL for r in self.laws.values())


def law_check(ra: ResourceAlgebra, sample_budget: int = 100_000, seed: int = 0) -> LawReport:
    """Associativity, commutativity, identity and validity down-closure.

    Exhaustive when the number of triples fits in ``sample_budget``,
    otherwise ``sample_budget`` triples are drawn with a seeded generator.
    The carrier is extended with ``INVALID``.
    """
    elems = [*ra.carrier(), INVALID]
    n = len(elems)
    exhaustive = n**3 <= sample_budget
    if exhaustive:
        triples = itertools.product(elems, repeat=3)
    else:
        rng = random.Random(seed)
        triples = ((rng.choice(elems), rng.choice(elems), rng.choice(elems)) for _ in range(sample_budget))
    pairs = list(itertools.product(elems, repeat=2)) if n * n <= sample_budget else None
    report = LawReport(ra.name, exhaustive, n - 1)
    c = ra.compose

    def run(name, cases, test):
        checked = 0
        for case in cases:
            checked += 1
            if not test(*case):
                report.laws[name] = LawResult(FAIL, checked, tuple(ra.render(x) for x in case))
                return
        report.laws[name] = LawResult(PASS, checked)

    run("associativity", triples, lambda a, b, d: c(c(a, b), d) == c(a, c(b, d)))
    if pairs is None:
        rng = random.Random(seed + 1)
        pairs = [(rng.choice(elems), rng.choice(elems)) for _ in range(sample_budget)]
    if ra.commutative:
        run("commutativity", pairs, lambda a, b: c(a, b) == c(b, a))
    else:
        report.laws["commutativity"] = LawResult("n/a", note="not commutative (a monoid, not a resource algebra)")
    if ra.unit is not None:
        e = ra.unit
        run("identity", ((a,) for a in elems), lambda a: c(a, e) == a and c(e, a) == a)
    else:
        report.laws["identity"] = LawResult("n/a", note="no unit element")

    def down_closed(a, b):
        r = c(a, b)
        return r is INVALID or (a is not INVALID and b is not INVALID and ra.valid(a) and ra.valid(b))

    run("down-closure", pairs, down_closed)
    return report


# -- the invariant rule --------------------------------------------------------------


@dataclass
class InvariantVerdict:
    result: str
    message: str
    counterexample: dict | None = None
    conclusion: str | None = None

    def __bool__(self) -> bool:
        return self.result == PASS


def _units(c: Command) -> list[Command]:
    if isinstance(c, Seq):
        return [u for item in c.items for u in _units(item)]
    return [c]


def invariant_rule_check(
    R: Assertion,
    P: Assertion,
    c: Command,
    Q: Assertion,
    domains: Domains,
    fuel: int = DEFAULT_FUEL,
) -> InvariantVerdict:
    """From ``{R ** P} c {R ** Q}`` with ``c`` physically atomic, conclude that
    ``c`` satisfies ``{P} c {Q}`` while preserving the invariant ``R``."""
    units = _units(c)
    if len(units) != 1 or not isinstance(units[0], ATOMIC):
        return InvariantVerdict(
            FAIL, f"premise violated: {show_cmd(c)} is not physically atomic ({len(units)} units)"
        )
    v = check_triple(Star(R, P), c, Star(R, Q), domains, fuel)
    if v.result == PASS:
        conclusion = f"{show_assertion(R)} |- {{{show_assertion(P)}}} {show_cmd(c)} {{{show_assertion(Q)}}}"
        return InvariantVerdict(PASS, f"invariant {show_assertion(R)} preserved by {show_cmd(c)}", None, conclusion)
    cex = None
    if v.counterexample is not None:
        cex = {"initial": v.counterexample.render()}
        if v.final is not None:
            cex["final"] = v.final.render()
    return InvariantVerdict(v.result, f"premise {{R ** P}} c {{R ** Q}} fails: {v.message}", cex)
