"""Candidate-rule sources: builtin enumeration, external processes, ensembles.

A proposer receives example pairs and returns candidate rules.  The
builtin proposer needs no model or randomness: it aligns each changed
pair with a minimal edit script, lifts groups of nearby edit operations
into rules under every context window of up to two phones per side
(optionally anchored to, or away from, a word edge), and ranks the
candidates by reward on the requesting examples.

External proposers are child processes speaking one JSON object per line
on stdin/stdout; invalid or late replies degrade to an empty candidate
list with diagnostics and never abort a search.  Ensembles pool their
members' candidates, deduplicated by canonical serialization.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from cascade_forge.metrics import EditOp, edit_script, reward
from cascade_forge.phonology import Inventory, TokenizedWord
from cascade_forge.rule_engine import (
    Delete,
    Insert,
    IsNothing,
    MappingFn,
    Not,
    PhoneSet,
    Predicate,
    Rule,
    RuleError,
    RuleParseError,
    Substitute,
    WordEnd,
    WordStart,
    apply_rule,
    rule_from_obj,
    serialize_rule,
)

TIMEOUT_ENV_VAR = "CASCADE_FORGE_PROPOSER_TIMEOUT_MS"
DEFAULT_TIMEOUT_MS = 120_000

# Caps for the builtin candidate grammar: edit groups may span at most
# MAX_SPAN source phones and carry up to MAX_CONTEXT context phones per side.
MAX_SPAN = 3
MAX_CONTEXT = 2
MAX_POOL = 768

EDGE_FREE = "free"
EDGE_AT = "at"
EDGE_NOT_AT = "not_at"


@dataclass(frozen=True)
class ProposalRequest:
    """Examples plus sampling budget handed to a proposer."""

    examples: tuple[tuple[TokenizedWord, TokenizedWord], ...]
    num_samples: int
    step_index: int = 0
    budget_hint_ms: int | None = None

    def __init__(self, examples, num_samples, step_index=0, budget_hint_ms=None):
        object.__setattr__(self, "examples", tuple((s, t) for s, t in examples))
        object.__setattr__(self, "num_samples", num_samples)
        object.__setattr__(self, "step_index", step_index)
        object.__setattr__(self, "budget_hint_ms", budget_hint_ms)
        if not self.examples:
            raise ValueError("proposal request has no examples")
        if self.num_samples < 1:
            raise ValueError(f"num_samples must be positive, got {num_samples}")


@dataclass(frozen=True)
class ProposerHandle:
    """Address of a rule source: builtin, external command, ensemble, or callable."""

    kind: str
    name: str = ""
    command: tuple[str, ...] = ()
    members: tuple["ProposerHandle", ...] = ()
    fn: Callable[[ProposalRequest], Sequence[Rule]] | None = field(default=None, compare=False)


def builtin_proposer() -> ProposerHandle:
    return ProposerHandle(kind="builtin", name="builtin")


def external_proposer(command: str | Sequence[str], name: str | None = None) -> ProposerHandle:
    argv = tuple(shlex.split(command)) if isinstance(command, str) else tuple(command)
    if not argv:
        raise ValueError("external proposer command is empty")
    return ProposerHandle(kind="external", name=name or argv[0], command=argv)


def ensemble_proposer(members: Iterable[ProposerHandle], name: str = "ensemble") -> ProposerHandle:
    members = tuple(members)
    if len(members) < 2:
        raise ValueError("an ensemble needs at least two members")
    return ProposerHandle(kind="ensemble", name=name, members=members)


def callable_proposer(
    fn: Callable[[ProposalRequest], Sequence[Rule]], name: str = "callable"
) -> ProposerHandle:
    return ProposerHandle(kind="callable", name=name, fn=fn)


@dataclass
class ProposeResult:
    rules: list[Rule]
    diagnostics: list[str]


# --- edit candidate extraction ------------------------------------------------


@dataclass(frozen=True)
class EditCandidate:
    """A group of edit operations plus one context window around them.

    ``ops`` hold positions relative to the covered source window: phone
    offsets for substitutions/deletions, gap offsets (0..len(covered)) for
    insertions.  ``left``/``right`` are context phones adjacent to the
    window; the edge markers say whether that side is anchored at a word
    edge, known not to be at one, or unconstrained.
    """

    ops: tuple[EditOp, ...]
    covered: tuple[str, ...]
    left: tuple[str, ...]
    right: tuple[str, ...]
    left_edge: str
    right_edge: str


def _window(ops: Sequence[EditOp]) -> tuple[int, int] | None:
    """Minimal source phone window [lo, hi) holding all ops, or None if too wide."""
    lo = None
    hi = None
    for op in ops:
        if op.kind == "ins":
            op_lo, op_hi = op.pos, op.pos
        else:
            op_lo, op_hi = op.pos, op.pos + 1
        lo = op_lo if lo is None else min(lo, op_lo)
        hi = op_hi if hi is None else max(hi, op_hi)
    assert lo is not None and hi is not None
    if hi - lo > MAX_SPAN:
        return None
    return lo, hi


def _side_variants(room: int) -> list[tuple[int, str]]:
    """(radius, edge marker) pairs available when `room` phones exist on a side."""
    variants: list[tuple[int, str]] = []
    for radius in range(0, MAX_CONTEXT + 1):
        if radius > room:
            break
        variants.append((radius, EDGE_FREE))
        if radius == room:
            variants.append((radius, EDGE_AT))
        else:
            variants.append((radius, EDGE_NOT_AT))
    return variants


def extract_edit_candidates(
    examples: Sequence[tuple[TokenizedWord, TokenizedWord]],
) -> list[EditCandidate]:
    """Deduplicated edit candidates from all changed pairs, in discovery order."""
    if not examples:
        raise ValueError("no examples")
    seen: set[EditCandidate] = set()
    ordered: list[EditCandidate] = []
    for source, target in examples:
        src, tgt = source.phones, target.phones
        if src == tgt:
            continue
        script = edit_script(src, tgt)
        for start in range(len(script)):
            for stop in range(start + 1, len(script) + 1):
                group = script[start:stop]
                window = _window(group)
                if window is None:
                    break
                lo, hi = window
                rel_ops = tuple(
                    EditOp(op.kind, op.pos - lo, op.old, op.new) for op in group
                )
                covered = tuple(src[lo:hi])
                for left_radius, left_edge in _side_variants(lo):
                    left = tuple(src[lo - left_radius : lo])
                    for right_radius, right_edge in _side_variants(len(src) - hi):
                        right = tuple(src[hi : hi + right_radius])
                        candidate = EditCandidate(
                            rel_ops, covered, left, right, left_edge, right_edge
                        )
                        if candidate not in seen:
                            seen.add(candidate)
                            ordered.append(candidate)
    return ordered


def candidate_to_rule(candidate: EditCandidate) -> Rule:
    """Realize an edit candidate as a rule over the canonical token layout."""
    preds: list[Predicate] = []
    changes: list[tuple[int, MappingFn]] = []
    inserts: dict[int, tuple[str, ...]] = {}
    edits: dict[int, MappingFn] = {}
    for op in candidate.ops:
        if op.kind == "ins":
            existing = inserts.get(op.pos, ())
            inserts[op.pos] = existing + op.new
        elif op.kind == "del":
            edits[op.pos] = Delete()
        else:
            edits[op.pos] = Substitute({op.old: op.new})

    def push_unit(pred: Predicate, mapping: MappingFn | None = None) -> None:
        if preds and not isinstance(preds[-1], IsNothing):
            preds.append(IsNothing())
        preds.append(pred)
        if mapping is not None:
            changes.append((len(preds) - 1, mapping))

    def push_gap(insert_phones: tuple[str, ...] | None) -> None:
        if insert_phones is None:
            return
        preds.append(IsNothing())
        changes.append((len(preds) - 1, Insert(insert_phones)))

    if candidate.left_edge == EDGE_AT:
        push_unit(WordStart())
    elif candidate.left_edge == EDGE_NOT_AT:
        push_unit(Not(WordStart()))
    for phone in candidate.left:
        push_unit(PhoneSet({phone}))
    for offset, phone in enumerate(candidate.covered):
        push_gap(inserts.get(offset))
        push_unit(PhoneSet({phone}), edits.get(offset))
    push_gap(inserts.get(len(candidate.covered)))
    for phone in candidate.right:
        push_unit(PhoneSet({phone}))
    if candidate.right_edge == EDGE_AT:
        push_unit(WordEnd())
    elif candidate.right_edge == EDGE_NOT_AT:
        push_unit(Not(WordEnd()))

    positions = tuple(pos for pos, _ in changes)
    mappings = tuple(fn for _, fn in changes)
    return Rule(preds, positions, mappings)


def builtin_enumerative_propose(
    request: ProposalRequest, inv: Inventory | None = None
) -> list[Rule]:
    """Deterministic candidate rules ranked by reward on the request's examples.

    Candidates supported by fewer changed pairs are pruned first, the pool is
    capped, every survivor is scored by reward, and ties break toward shorter
    environments and then canonical serialization.
    """
    sources = [s for s, _ in request.examples]
    targets = [t for _, t in request.examples]
    changed = [(s, t) for s, t in request.examples if s.phones != t.phones]
    if not changed:
        return []

    support: dict[EditCandidate, int] = {}
    order: dict[EditCandidate, int] = {}
    for source, target in changed:
        for candidate in extract_edit_candidates([(source, target)]):
            if candidate not in order:
                order[candidate] = len(order)
                support[candidate] = 0
            support[candidate] += 1

    min_support = min(2, len(changed))
    pool = [c for c in order if support[c] >= min_support]
    pool.sort(key=lambda c: (-support[c], order[c]))
    pool = pool[:MAX_POOL]

    rules: dict[str, Rule] = {}
    for candidate in pool:
        rule = candidate_to_rule(candidate)
        key = serialize_rule(rule)
        if key not in rules:
            rules[key] = rule

    scored: list[tuple[float, int, str, Rule]] = []
    for key, rule in rules.items():
        preds = [apply_rule(rule, s, inv) for s in sources]
        scored.append((reward(sources, preds, targets), rule.environment_size(), key, rule))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))
    return [rule for _, _, _, rule in scored[: request.num_samples]]


# --- external protocol --------------------------------------------------------


def request_to_obj(request: ProposalRequest) -> dict[str, Any]:
    return {
        "v": 1,
        "examples": [
            {"source": list(s.phones), "target": list(t.phones)} for s, t in request.examples
        ],
        "num_samples": request.num_samples,
        "step": request.step_index,
    }


def _timeout_seconds(timeout_ms: int | None) -> float:
    if timeout_ms is None:
        raw = os.environ.get(TIMEOUT_ENV_VAR)
        if raw is not None:
            try:
                timeout_ms = int(raw)
            except ValueError:
                timeout_ms = DEFAULT_TIMEOUT_MS
        else:
            timeout_ms = DEFAULT_TIMEOUT_MS
    return max(timeout_ms, 1) / 1000.0


def external_propose(
    command: Sequence[str],
    request: ProposalRequest,
    inv: Inventory | None = None,
    timeout_ms: int | None = None,
) -> ProposeResult:
    """One request line out, one response line in, within the timeout.

    Every failure mode (spawn error, timeout, malformed reply, invalid
    program) degrades to dropped candidates plus a diagnostic.
    """
    diagnostics: list[str] = []
    line = json.dumps(request_to_obj(request), ensure_ascii=False)
    try:
        proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
    except OSError as exc:
        return ProposeResult([], [f"proposer spawn failed: {exc}"])
    try:
        stdout, stderr = proc.communicate(line + "\n", timeout=_timeout_seconds(timeout_ms))
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return ProposeResult([], [f"proposer timed out: {' '.join(command)}"])
    if proc.returncode != 0:
        diagnostics.append(f"proposer exited with status {proc.returncode}: {stderr.strip()[:200]}")
    reply = next((l for l in stdout.splitlines() if l.strip()), "")
    if not reply:
        diagnostics.append("proposer produced no response line")
        return ProposeResult([], diagnostics)
    try:
        obj = json.loads(reply)
    except json.JSONDecodeError as exc:
        diagnostics.append(f"malformed proposer response: {exc}")
        return ProposeResult([], diagnostics)
    programs = obj.get("programs") if isinstance(obj, dict) else None
    if not isinstance(programs, list):
        diagnostics.append("proposer response has no 'programs' list")
        return ProposeResult([], diagnostics)
    rules: list[Rule] = []
    for i, program in enumerate(programs):
        try:
            rules.append(rule_from_obj(program, f"/programs/{i}", inv))
        except (RuleParseError, RuleError) as exc:
            diagnostics.append(f"dropped invalid program {i}: {exc}")
    return ProposeResult(rules, diagnostics)


# --- dispatch -----------------------------------------------------------------


def propose(
    handle: ProposerHandle,
    request: ProposalRequest,
    inv: Inventory | None = None,
    timeout_ms: int | None = None,
) -> ProposeResult:
    """Run a proposer; ensembles return the pooled, deduplicated union.

    Returned rules always satisfy the rule invariants; at most
    ``num_samples`` rules are taken per (non-ensemble) member.
    """
    if handle.kind == "builtin":
        return ProposeResult(builtin_enumerative_propose(request, inv), [])
    if handle.kind == "callable":
        assert handle.fn is not None
        rules: list[Rule] = []
        diagnostics: list[str] = []
        for i, rule in enumerate(handle.fn(request)):
            try:
                rule.validate(inv)
            except RuleError as exc:
                diagnostics.append(f"dropped invalid candidate {i} from {handle.name}: {exc}")
                continue
            rules.append(rule)
        return ProposeResult(rules[: request.num_samples], diagnostics)
    if handle.kind == "external":
        result = external_propose(handle.command, request, inv, timeout_ms)
        result.rules = result.rules[: request.num_samples]
        return result
    if handle.kind == "ensemble":
        pooled: dict[str, Rule] = {}
        diagnostics = []
        for member in handle.members:
            sub = propose(member, request, inv, timeout_ms)
            diagnostics.extend(sub.diagnostics)
            for rule in sub.rules:
                pooled.setdefault(serialize_rule(rule), rule)
        return ProposeResult(list(pooled.values()), diagnostics)
    raise ValueError(f"unknown proposer kind {handle.kind!r}")
