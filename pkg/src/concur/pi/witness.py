"""Independent re-check of bisimulation witnesses.

Only the transition function is shared with the checker; grouping,
name normalisation and matching are redone here.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping

from .semantics import BoundOutput, fresh_input_name, transitions
from .terms import AgentDef, Process, canonical_key, free_names, substitute


def _normalised(p: Process, universe, omega, defs) -> list[tuple[object, tuple]]:
    out = []
    for tr in transitions(p, defs, universe):
        act, tgt = tr.action, tr.target
        if isinstance(act, BoundOutput):
            tgt = substitute(tgt, {act.fresh: omega})
            act = BoundOutput(act.chan, omega)
        out.append((act, canonical_key(tgt)))
    return out


def witness_failures(
    witness: Iterable[tuple[Process, Process]], defs: Mapping[str, AgentDef]
) -> list[str]:
    """Transfer-property violations of ``witness``; empty means it is closed."""
    pairs = list(witness)
    relation = {(canonical_key(a), canonical_key(b)) for a, b in pairs}
    problems = []
    for s, t in pairs:
        universe = free_names(s) | free_names(t)
        omega = fresh_input_name(universe)
        ms = _normalised(s, universe, omega, defs)
        mt = _normalised(t, universe, omega, defs)
        for act, s2 in ms:
            if not any(a == act and (s2, t2) in relation for a, t2 in mt):
                problems.append(f"left move {act} of pair #{pairs.index((s, t))} is unmatched")
        for act, t2 in mt:
            if not any(a == act and (s2, t2) in relation for a, s2 in ms):
                problems.append(f"right move {act} of pair #{pairs.index((s, t))} is unmatched")
    return problems


def verify_witness(witness: Iterable[tuple[Process, Process]], defs: Mapping[str, AgentDef]) -> bool:
    return not witness_failures(witness, defs)

