"""Command-line entry point: ``concur <group> <command> ...``.

Every command builds a report with a verdict, structured details, an
optional counterexample and statistics.  ``--json`` prints the report as
one JSON document; otherwise a short human-readable summary is printed.
Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .logic.csl import (
    RACE_FREE,
    RACY,
    check_outline_csl,
    check_ownership_partition,
    detect_race,
)
from .logic.hoare import FAIL, INCONCLUSIVE, PASS, check_outline
from .logic.lang import Par, walk
from .logic.parser import (
    OutlineError,
    OutlineSyntaxError,
    parse_assertion,
    parse_command,
    parse_outline,
)
from .logic.state import DEFAULT_DOMAIN, DEFAULT_FUEL, Domains
from .pi.bisim import (
    BOUND_EXCEEDED,
    bisimilar,
    law_suite,
    mutation_suite,
    render_witness,
)
from .pi.encodings import std_env, truth_table
from .pi.parser import parse_process, parse_program, print_process
from .pi.semantics import explore_reductions, run_trace
from .pi.terms import Call, PiError
from .pi.witness import witness_failures
from .ra import (
    INVALID,
    AlgebraMismatch,
    ExclusiveRA,
    FracRA,
    Nat,
    NatRA,
    algebras,
    auth_ok,
    invariant_rule_check,
    law_check,
)

EXIT = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
ERROR = "error"
DEFAULT_MAX_STATES = 10000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _domain(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"empty domain {text!r}")
    return lo_i, hi_i


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="print the report as JSON")
    p.add_argument("--seed", type=int, default=d(0), help="scheduler and sampling seed")
    p.add_argument("--max-states", type=int, default=d(DEFAULT_MAX_STATES), help="state bound for pi exploration")
    p.add_argument("--fuel", type=int, default=d(DEFAULT_FUEL), help="configuration bound for logic exploration")
    p.add_argument("--domain", type=_domain, default=d(DEFAULT_DOMAIN), help="default variable domain LO..HI")
    p.add_argument("--timing", action="store_true", default=d(False), help="include elapsed time in the report")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="concur", description="Check pi-calculus programs, proof outlines and resource algebras.")
    _add_globals(top, suppress=False)
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def sub(parent, name, help):
        p = parent.add_parser(name, help=help)
        _add_globals(p, suppress=True)
        return p

    pi = groups.add_parser("pi", help="pi-calculus programs").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = sub(pi, "run", "follow one seeded reduction sequence")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=1000)
    p = sub(pi, "trace", "print a reduction sequence, or every maximal one")
    p.add_argument("file")
    p.add_argument("--all", action="store_true", help="explore every interleaving")
    p = sub(pi, "bisim", "decide strong bisimilarity of two processes")
    p.add_argument("file")
    p.add_argument("p", help="agent name or process expression")
    p.add_argument("q", help="agent name or process expression")
    sub(pi, "laws", "run the bisimulation law suite and its mutations")
    sub(pi, "gates", "truth table of the And gate")

    logic = groups.add_parser("logic", help="proof outlines").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = sub(logic, "check", "check a proof outline")
    p.add_argument("file")

    race = groups.add_parser("race", help="race detection").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = sub(race, "check", "explore every interleaving of an outline's program for races")
    p.add_argument("file")

    ra = groups.add_parser("ra", help="resource algebras").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    names = sorted(algebras())
    p = sub(ra, "laws", "check the algebra laws")
    p.add_argument("algebra", choices=[*names, "all"])
    p = sub(ra, "compose", "compose two elements")
    p.add_argument("algebra", choices=names)
    p.add_argument("a")
    p.add_argument("b")
    sub(ra, "demo", "run the bundled algebra and invariant-rule examples")
    return top


# -- reports -----------------------------------------------------------------------------


def report(tool: str, verdict: str, details: dict, counterexample=None, states: int = 0) -> dict:
    return {
        "tool": tool,
        "verdict": verdict,
        "details": details,
        "counterexample": counterexample,
        "stats": {"states": states},
    }


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None


# -- pi -----------------------------------------------------------------------------------


def _program(args):
    return parse_program(_read(args.file))


def cmd_pi_run(args) -> dict:
    prog = _program(args)
    tr = run_trace(prog.main, prog.defs, scheduler_seed=args.seed, max_steps=args.max_steps)
    chain = [print_process(prog.main)] + [print_process(s.target) for s in tr.steps]
    verdict = PASS if tr.status == "terminated" else INCONCLUSIVE
    return report("pi run", verdict, {"steps": len(tr.steps), "status": tr.status, "final": chain[-1], "trace": chain}, states=len(chain))


def cmd_pi_trace(args) -> dict:
    prog = _program(args)
    if not args.all:
        tr = run_trace(prog.main, prog.defs, scheduler_seed=args.seed)
        chain = [print_process(prog.main)] + [print_process(s.target) for s in tr.steps]
        verdict = PASS if tr.status == "terminated" else INCONCLUSIVE
        return report("pi trace", verdict, {"traces": [chain], "finals": [chain[-1]]}, states=len(chain))
    g = explore_reductions(prog.main, prog.defs, args.max_states)
    paths = [[print_process(g.states[i]) for i in path] for path in g.maximal_paths()]
    finals = sorted({print_process(g.states[i]) for i in g.terminals()})
    details = {"traces": paths, "finals": finals, "confluent": len(finals) == 1}
    return report("pi trace", INCONCLUSIVE if g.truncated else PASS, details, states=len(g.states))


def _process(text: str, prog):
    d = prog.defs.get(text)
    if d is not None and not d.params:
        return Call(text, ())
    return parse_process(text)


def cmd_pi_bisim(args) -> dict:
    prog = _program(args)
    p, q = _process(args.p, prog), _process(args.q, prog)
    v = bisimilar(p, q, prog.defs, args.max_states)
    details = {"p": print_process(p), "q": print_process(q), "result": v.result, "pairs": v.pairs}
    if v.bisimilar:
        failures = witness_failures(v.witness, prog.defs)
        details["witness"] = render_witness(v)
        details["witness_verified"] = not failures
        return report("pi bisim", PASS if not failures else FAIL, details, states=v.states)
    if v.result == BOUND_EXCEEDED:
        return report("pi bisim", INCONCLUSIVE, details, states=v.states)
    return report("pi bisim", FAIL, details, {"trace": [str(a) for a in v.trace]}, v.states)


def cmd_pi_laws(args) -> dict:
    defs = std_env()
    laws = law_suite(defs, args.max_states)
    muts = mutation_suite(defs, args.max_states)
    per_law = {}
    for law, insts in laws.by_law().items():
        checked = [i for i in insts if i.side_condition]
        per_law[law] = {
            "instances": len(checked),
            "bisimilar": sum(1 for i in checked if i.holds),
            "side_condition_failed": len(insts) - len(checked),
            "witnesses_verified": sum(1 for i in checked if i.holds and not witness_failures(i.verdict.witness, defs)),
        }
    mutations = [
        {
            "law": m.law,
            "lhs": print_process(m.lhs),
            "rhs": print_process(m.rhs),
            "result": m.verdict.result,
            "trace": [str(a) for a in m.verdict.trace],
        }
        for m in muts
    ]
    ok = laws.ok and all(m.verdict.result == "not-bisimilar" and m.verdict.trace for m in muts)
    ok = ok and all(v["witnesses_verified"] == v["bisimilar"] for v in per_law.values())
    cex = None
    if laws.counterexamples:
        bad = laws.counterexamples[0]
        cex = {"law": bad.law, "lhs": print_process(bad.lhs), "rhs": print_process(bad.rhs)}
    states = sum(i.verdict.states for i in laws.instances if i.verdict) + sum(m.verdict.states for m in muts)
    return report("pi laws", PASS if ok else FAIL, {"laws": per_law, "mutations": mutations}, cex, states)


def cmd_pi_gates(args) -> dict:
    rows = truth_table("And")
    table = [{"x": str(r.x), "y": str(r.y), "out": str(r.result)} for r in rows]
    ok = all((r.result.ident == "T") == (r.x.ident == "T" and r.y.ident == "T") for r in rows)
    return report("pi gates", PASS if ok else FAIL, {"gate": "And", "table": table})


# -- logic ---------------------------------------------------------------------------------


def _outline(args):
    return parse_outline(_read(args.file), default_domain=args.domain)


def _has_par(o) -> bool:
    return any(isinstance(c, Par) for c in walk(o.body))


def _race_details(o, args) -> tuple[dict, dict | None, str, int]:
    rep = detect_race(o.body, o.pre, o.domains, args.fuel, o.assumed)
    details = {"race": rep.verdict, "classification": rep.classification, "shared": rep.shared}
    verdict = {RACE_FREE: PASS, RACY: FAIL}.get(rep.verdict, INCONCLUSIVE)
    cex = rep.witness.render() if rep.witness else None
    return details, cex, verdict, rep.explored


def _ownership(o, args) -> dict:
    v = check_ownership_partition(o.body, o.resources, o.domains, o.pre, args.fuel, o.assumed)
    out = {"result": v.result, "points": v.points, "owners": {str(a): who for a, who in v.owners.items()}}
    if v.failure:
        out["failure"] = v.failure
    return out


def cmd_logic_check(args) -> dict:
    o = _outline(args)
    check = check_outline_csl if o.csl else check_outline
    v = check(o, args.fuel)
    details = {
        "mode": "csl" if o.csl else "hoare",
        "obligations": [ob.render() for ob in v.obligations],
        "notes": list(v.notes),
    }
    states = 0
    if o.resources and _has_par(o):
        race, _, _, states = _race_details(o, args)
        details.update(race)
        details["ownership"] = _ownership(o, args)
    failed = v.failures
    cex = None
    if failed:
        cex = {"rule": failed[0].rule, "line": failed[0].line, "message": failed[0].message}
        if failed[0].counterexample is not None:
            cex["state"] = failed[0].counterexample
    return report("logic check", v.result, details, cex, states)


def cmd_race_check(args) -> dict:
    o = _outline(args)
    details, cex, verdict, states = _race_details(o, args)
    if o.resources:
        details["ownership"] = _ownership(o, args)
    return report("race check", verdict, details, cex, states)


# -- resource algebras ---------------------------------------------------------------------------


def _laws(ra, args) -> dict:
    r = law_check(ra, seed=args.seed)
    return {
        "algebra": r.algebra,
        "carrier": r.carrier_size,
        "exhaustive": r.exhaustive,
        "laws": {
            name: {"status": res.status, "checked": res.checked, "counterexample": list(res.counterexample) if res.counterexample else None}
            for name, res in r.laws.items()
        },
        "ok": r.ok,
    }


def cmd_ra_laws(args) -> dict:
    algs = algebras()
    chosen = sorted(algs) if args.algebra == "all" else [args.algebra]
    results = [_laws(algs[n], args) for n in chosen]
    bad = next((r for r in results if not r["ok"]), None)
    cex = None
    if bad:
        law, res = next((k, v) for k, v in bad["laws"].items() if v["status"] == FAIL)
        cex = {"algebra": bad["algebra"], "law": law, "elements": res["counterexample"]}
    return report("ra laws", FAIL if bad else PASS, {"algebras": results}, cex)


def cmd_ra_compose(args) -> dict:
    ra = algebras()[args.algebra]
    try:
        a, b = ra.parse(args.a), ra.parse(args.b)
        r = ra.compose(a, b)
    except (ValueError, AlgebraMismatch) as err:
        raise UsageError(str(err)) from None
    details = {"algebra": ra.name, "a": ra.render(a), "b": ra.render(b), "result": ra.render(r), "valid": r is not INVALID}
    return report("ra compose", PASS, details)


def _invariant_examples() -> list[tuple[str, object, str]]:
    d = Domains({}, (10,), (0, 3))
    emp = parse_assertion("emp")
    either = parse_assertion("10 |-> 0 || 10 |-> 1")
    return [
        ("atomic store preserves the invariant", invariant_rule_check(either, emp, parse_command("[10] := 1"), emp, d), PASS),
        ("two-unit command", invariant_rule_check(either, emp, parse_command("[10] := 1; [10] := 0"), emp, d), FAIL),
        ("premise fails", invariant_rule_check(parse_assertion("10 |-> 0"), emp, parse_command("[10] := 1"), emp, d), FAIL),
    ]


def cmd_ra_demo(args) -> dict:
    algs = algebras()
    laws = [_laws(algs[n], args) for n in sorted(algs)]
    ex, fr, nat = ExclusiveRA(), FracRA(), NatRA(5)
    witnesses = [
        {"case": "ex(a) . ex(b)", "result": ex.render(ex.compose(ex.parse("a"), ex.parse("b"))), "expected": "invalid"},
        {"case": "1/2 . 1/2", "result": fr.render(fr.compose(fr.parse("1/2"), fr.parse("1/2"))), "expected": "1"},
        {"case": "3/4 . 1/2", "result": fr.render(fr.compose(fr.parse("3/4"), fr.parse("1/2"))), "expected": "invalid"},
        {"case": "auth 5 frag 3", "result": str(auth_ok(Nat(5), Nat(3), nat)).lower(), "expected": "true"},
        {"case": "auth 5 frag 7", "result": str(auth_ok(Nat(5), Nat(7), nat)).lower(), "expected": "false"},
    ]
    invariant = [
        {"case": name, "result": v.result, "expected": want, "message": v.message, "counterexample": v.counterexample}
        for name, v, want in _invariant_examples()
    ]
    ok = all(r["ok"] for r in laws) and all(w["result"] == w["expected"] for w in witnesses + invariant)
    return report("ra demo", PASS if ok else FAIL, {"algebras": laws, "witnesses": witnesses, "invariant_rule": invariant})


COMMANDS = {
    ("pi", "run"): cmd_pi_run,
    ("pi", "trace"): cmd_pi_trace,
    ("pi", "bisim"): cmd_pi_bisim,
    ("pi", "laws"): cmd_pi_laws,
    ("pi", "gates"): cmd_pi_gates,
    ("logic", "check"): cmd_logic_check,
    ("race", "check"): cmd_race_check,
    ("ra", "laws"): cmd_ra_laws,
    ("ra", "compose"): cmd_ra_compose,
    ("ra", "demo"): cmd_ra_demo,
}


# -- rendering ---------------------------------------------------------------------------------


def _color(verdict: str) -> str:
    if os.environ.get("CONCUR_COLOR") == "0" or not sys.stdout.isatty():
        return verdict
    code = {PASS: "32", FAIL: "31", INCONCLUSIVE: "33"}.get(verdict, "35")
    return f"\033[{code}m{verdict}\033[0m"


def render_text(rep: dict) -> str:
    lines = [f"{rep['tool']}: {_color(rep['verdict'])}"]
    d = rep["details"]
    if "traces" in d:
        for tr in d["traces"]:
            lines.append("  " + "\n  --> ".join(tr))
    for ob in d.get("obligations", []):
        if ob["status"] != "discharged":
            lines.append(f"  line {ob['line']} {ob['rule']}: {ob['status']}: {ob['message']}")
    for key in ("race", "classification", "result", "final"):
        if key in d:
            lines.append(f"  {key}: {d[key]}")
    if "ownership" in d:
        lines.append(f"  ownership: {d['ownership']['result']} at {d['ownership']['points']} points")
    for key in ("algebras",):
        for a in d.get(key, []):
            laws = ", ".join(f"{k} {v['status']}" for k, v in a["laws"].items())
            lines.append(f"  {a['algebra']}: {laws}")
    for key in ("witnesses", "invariant_rule", "mutations", "table"):
        for w in d.get(key, []):
            lines.append("  " + " ".join(f"{k}={v}" for k, v in w.items() if v is not None))
    if "laws" in d and isinstance(d["laws"], dict):
        for law, v in d["laws"].items():
            lines.append(f"  {law}: {v['bisimilar']}/{v['instances']} bisimilar")
    if rep.get("counterexample") is not None:
        lines.append("  counterexample: " + json.dumps(rep["counterexample"], sort_keys=True))
    stats = rep["stats"]
    lines.append("  states: " + str(stats["states"]) + (f", elapsed: {stats['elapsed']:.3f}s" if "elapsed" in stats else ""))
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return 3
    tool = f"{args.group} {args.cmd}"
    start = time.perf_counter()
    try:
        if args.fuel < 1 or args.max_states < 1:
            raise UsageError("--fuel and --max-states must be positive")
        rep = COMMANDS[(args.group, args.cmd)](args)
    except (UsageError, PiError, OutlineSyntaxError, OutlineError) as err:
        if args.json:
            print(json.dumps({"tool": tool, "verdict": ERROR, "error": str(err)}, sort_keys=True))
        print(f"{tool}: error: {err}", file=sys.stderr)
        return 3
    if args.timing:
        rep["stats"]["elapsed"] = round(time.perf_counter() - start, 6)
    if args.json:
        print(json.dumps(rep, sort_keys=True, indent=2))
    else:
        print(render_text(rep))
    return EXIT[rep["verdict"]]


if __name__ == "__main__":
    sys.exit(main())
