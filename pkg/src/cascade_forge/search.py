"""Cascade induction: example selection, single-law ranking, beam search.

The beam search keeps up to ``beam_width`` hypotheses, each an ordered
rule cascade applied to the dataset's sources.  Every step each beam
requests candidate rules from the proposer using its current forms
against the targets, successors append one rule each, and parents stay
in the candidate set so a beam can stand pat; the pool then contracts
back to the top beams by reward.  Because parents survive, the best
reward never decreases.  All tie-breaks are total orders, so a fixed
dataset, config, and proposer transcript reproduce identical beams.

Scoring always uses the full dataset; example selection only narrows
what the proposer sees.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace
from typing import Sequence

from cascade_forge.metrics import (
    Dataset,
    ExamplePair,
    RewardReport,
    edit_script,
    reward_report,
)
from cascade_forge.phonology import Inventory, TokenizedWord
from cascade_forge.proposers import ProposalRequest, ProposerHandle, propose
from cascade_forge.rule_engine import (
    Cascade,
    Rule,
    apply_rule,
    cascade_to_obj,
    serialize_cascade,
    serialize_rule,
)


@dataclass(frozen=True)
class SearchConfig:
    beam_width: int = 20
    samples_per_step: int = 1
    max_steps: int = 10
    seed: int = 0
    early_stop_on_perfect: bool = True

    def __post_init__(self) -> None:
        if self.beam_width < 1 or self.samples_per_step < 1 or self.max_steps < 1:
            raise ValueError("beam_width, samples_per_step and max_steps must all be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    """A cascade plus the forms and reward it produces on the dataset."""

    cascade: Cascade
    forms: tuple[TokenizedWord, ...]
    reward: float
    step: int


def select_examples_ites(
    pairs: Sequence[ExamplePair],
) -> tuple[list[ExamplePair], set[str]]:
    """Drop identity pairs that carry no change-triggering phones.

    The trigger set holds every source phone within one position of an edit
    operation across all changed pairs.  Changed pairs are always retained
    and the original order is preserved; with all-identity input everything
    is dropped.
    """
    triggers: set[str] = set()
    changed_ids: set[str] = set()
    for pair in pairs:
        src = pair.source.phones
        if src == pair.target.phones:
            continue
        changed_ids.add(pair.id)
        for op in edit_script(src, pair.target.phones):
            lo = op.pos - 1
            hi = op.pos if op.kind == "ins" else op.pos + 1
            for index in range(lo, hi + 1):
                if 0 <= index < len(src):
                    triggers.add(src[index])
    filtered = [
        pair
        for pair in pairs
        if pair.id in changed_ids or any(p in triggers for p in pair.source.phones)
    ]
    return filtered, triggers


def _proposer_view(pairs: Sequence[ExamplePair], use_ites: bool) -> Sequence[ExamplePair]:
    if not use_ites:
        return pairs
    filtered, _ = select_examples_ites(pairs)
    return filtered if filtered else pairs


def induce_single_law(
    handle: ProposerHandle,
    dataset: Dataset,
    samples: int = 20,
    use_ites: bool = False,
    inv: Inventory | None = None,
    diagnostics: list[str] | None = None,
) -> list[tuple[Rule, RewardReport]]:
    """Request candidates once and rank them by reward on the full dataset."""
    view = _proposer_view(dataset.pairs, use_ites)
    request = ProposalRequest(
        [(p.source, p.target) for p in view], num_samples=samples, step_index=0
    )
    result = propose(handle, request, inv)
    if diagnostics is not None:
        diagnostics.extend(result.diagnostics)
    sources = dataset.sources
    targets = dataset.targets
    scored: list[tuple[Rule, RewardReport, str]] = []
    seen: set[str] = set()
    for rule in result.rules:
        key = serialize_rule(rule)
        if key in seen:
            continue
        seen.add(key)
        preds = [apply_rule(rule, s, inv) for s in sources]
        scored.append((rule, reward_report(sources, preds, targets), key))
    scored.sort(key=lambda item: (-item[1].reward, len(item[2]), item[2]))
    return [(rule, report) for rule, report, _ in scored]


def _forms_fingerprint(forms: Sequence[TokenizedWord]) -> tuple[tuple[str, ...], ...]:
    return tuple(w.tokens for w in forms)


def _rank_key(hypothesis: Hypothesis) -> tuple[float, int, str]:
    return (-hypothesis.reward, len(hypothesis.cascade), serialize_cascade(hypothesis.cascade))


def beam_search_cascade(
    handle: ProposerHandle,
    dataset: Dataset,
    config: SearchConfig,
    inv: Inventory | None = None,
    use_ites: bool = False,
    run_dir: str | None = None,
    diagnostics: list[str] | None = None,
) -> list[Hypothesis]:
    """Induce a rule cascade; returns the final beams sorted by reward."""
    sources = dataset.sources
    targets = dataset.targets
    log_lines: list[str] = []
    writer = _RunWriter(run_dir) if run_dir else None
    if writer:
        writer.write_config(config, handle, use_ites)

    initial = reward_report(sources, sources, targets)
    beams = [Hypothesis(Cascade(), tuple(sources), initial.reward, 0)]

    for step in range(1, config.max_steps + 1):
        candidates: list[Hypothesis] = [replace(beam, step=step) for beam in beams]
        proposed_any = False
        for beam in beams:
            pairs = [
                ExamplePair(form, target, dataset.pairs[i].id)
                for i, (form, target) in enumerate(zip(beam.forms, targets))
            ]
            view = _proposer_view(pairs, use_ites)
            request = ProposalRequest(
                [(p.source, p.target) for p in view],
                num_samples=config.samples_per_step,
                step_index=step - 1,
            )
            result = propose(handle, request, inv)
            if diagnostics is not None:
                diagnostics.extend(result.diagnostics)
            for rule in result.rules:
                proposed_any = True
                forms = tuple(apply_rule(rule, form, inv) for form in beam.forms)
                report = reward_report(sources, forms, targets)
                candidates.append(
                    Hypothesis(Cascade(beam.cascade.rules + (rule,)), forms, report.reward, step)
                )
        candidates.sort(key=_rank_key)
        deduped: list[Hypothesis] = []
        seen_forms = set()
        for candidate in candidates:
            fingerprint = _forms_fingerprint(candidate.forms)
            if fingerprint in seen_forms:
                continue
            seen_forms.add(fingerprint)
            deduped.append(candidate)
            if len(deduped) == config.beam_width:
                break
        beams = deduped
        best = beams[0]
        log_lines.append(
            f"step {step}: {len(candidates)} candidates, best reward {best.reward:.6f}, "
            f"cascade length {len(best.cascade)}"
            + ("" if proposed_any else " (no proposals; carried forward)")
        )
        if writer:
            writer.write_step(step, beams)
        if config.early_stop_on_perfect and best.reward == 1.0:
            log_lines.append(f"step {step}: perfect reward reached, stopping early")
            break

    beams = sorted(beams, key=_rank_key)
    if writer:
        writer.write_best(beams[0])
        writer.write_log(log_lines)
    return beams


def pick_best(hypotheses: Sequence[Hypothesis]) -> Hypothesis:
    """Highest reward; ties prefer fewer rules, then serialization order."""
    if not hypotheses:
        raise ValueError("no hypotheses")
    return min(hypotheses, key=_rank_key)


def hypothesis_to_obj(hypothesis: Hypothesis) -> dict:
    return {
        "reward": hypothesis.reward,
        "step": hypothesis.step,
        "cascade": cascade_to_obj(hypothesis.cascade),
        "forms": [w.surface for w in hypothesis.forms],
    }


class _RunWriter:
    """Writes the run directory layout: config, per-step beams, best, log."""

    def __init__(self, run_dir: str):
        self.run_dir = run_dir
        os.makedirs(os.path.join(run_dir, "beams"), exist_ok=True)

    def _write(self, relpath: str, text: str) -> None:
        path = os.path.join(self.run_dir, relpath)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)

    def _write_json(self, relpath: str, obj) -> None:
        self._write(relpath, json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n")

    def write_config(self, config: SearchConfig, handle: ProposerHandle, use_ites: bool) -> None:
        obj = asdict(config)
        obj["proposer"] = handle.name
        obj["use_ites"] = use_ites
        self._write_json("config.json", obj)

    def write_step(self, step: int, beams: Sequence[Hypothesis]) -> None:
        self._write_json(
            os.path.join("beams", f"step_{step:03d}.json"),
            [hypothesis_to_obj(b) for b in beams],
        )

    def write_best(self, best: Hypothesis) -> None:
        self._write_json("best.json", hypothesis_to_obj(best))

    def write_log(self, lines: Sequence[str]) -> None:
        self._write("log.txt", "\n".join(lines) + "\n")
