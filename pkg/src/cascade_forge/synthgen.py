"""Synthetic corpus generation.

Three generators, all driven by seeded RNG streams and all enforcing the
same master invariant: re-applying a case's ground-truth cascade to its
sources reproduces its targets exactly.

* ``smp``: random string-manipulation laws over concrete phones, with
  environments of one to three phones, a 25% chance of a boundary
  condition, and protoform quotas that guarantee the environment occurs.
* ``ling``: feature-driven laws.  Context and change lengths come from
  Gaussian draws, per-position feature requirements are Gaussian-gated,
  and each changing phone independently risks deletion (1/8),
  substitution (1/8), and insertion on either side (1/16 each).  Rules
  are rejection-sampled until they apply to a minimum number of the
  nonce protoforms.
* ``multilaw``: subsamples ordered rule subsets from a pool and builds
  word sets of which at least half stay unchanged under the cascade.

Generated words are always checked to re-tokenize to the phones they
were built from, so corpus files read back identically.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from random import Random
from typing import Sequence

from cascade_forge.metrics import Dataset, ExamplePair
from cascade_forge.phonology import (
    Inventory,
    TokenizedWord,
    realize_feature_change,
    tokenize,
    TokenizeError,
)
from cascade_forge.rule_engine import (
    Cascade,
    Delete,
    FeatureReq,
    Insert,
    IsNothing,
    MappingFn,
    Not,
    PhoneSet,
    Predicate,
    Rule,
    Substitute,
    WordEnd,
    WordStart,
    apply_cascade,
    apply_rule,
    find_sites,
)

GENERATOR_VERSION = 1


class GenerationError(RuntimeError):
    """Raised when a generation budget or attempt cap is exhausted."""


@dataclass(frozen=True)
class SmpSpec:
    examples_per_law: int = 50
    env_weights: tuple[float, float, float] = (0.7, 0.2, 0.1)
    boundary_weights: tuple[float, float, float, float, float] = (
        1 / 16, 1 / 16, 1 / 16, 1 / 16, 3 / 4,
    )
    seed: int = 0

    def __post_init__(self) -> None:
        if self.examples_per_law % 10 != 0 or self.examples_per_law <= 0:
            raise ValueError("examples_per_law must be a positive multiple of 10")
        for weights in (self.env_weights, self.boundary_weights):
            if abs(sum(weights) - 1.0) > 1e-9:
                raise ValueError(f"weights {weights} do not sum to 1")


@dataclass(frozen=True)
class LingSpec:
    num_languages: int = 2000
    rules_per_language: int = 3
    protoforms_per_language: int = 50
    min_applicable: int = 3
    p_delete: float = 1 / 8
    p_substitute: float = 1 / 8
    p_insert: float = 1 / 16
    seed: int = 0

    def __post_init__(self) -> None:
        for p in (self.p_delete, self.p_substitute, self.p_insert):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        if self.min_applicable > self.protoforms_per_language:
            raise ValueError("min_applicable exceeds protoforms_per_language")


@dataclass
class SynthCase:
    """A ground-truth cascade plus the dataset it generated."""

    ground_truth: Cascade
    dataset: Dataset
    provenance: dict


def verify_case(case: SynthCase, inv: Inventory) -> None:
    """Assert the master invariant: the cascade reproduces every target."""
    for pair in case.dataset.pairs:
        produced, _ = apply_cascade(case.ground_truth, pair.source, inv)
        if produced != pair.target:
            raise AssertionError(
                f"case {case.dataset.name}: pair {pair.id} not reproduced "
                f"({produced.surface!r} != {pair.target.surface!r})"
            )


def task_rng(seed: int, *parts) -> Random:
    """A deterministic RNG stream derived from the root seed and a task label."""
    return Random("|".join([str(seed), *[str(p) for p in parts]]))


# --- canonical word construction ---------------------------------------------


def _canonical_word(inv: Inventory, phones: Sequence[str]) -> TokenizedWord | None:
    """Build a word from phones if its surface re-tokenizes to the same phones."""
    word = TokenizedWord.from_phones(phones)
    try:
        again = tokenize(word.surface, inv)
    except TokenizeError:
        return None
    return word if again == word else None


def _roundtrips(inv: Inventory, word: TokenizedWord) -> bool:
    try:
        return tokenize(word.surface, inv) == word
    except TokenizeError:
        return False


# --- string-manipulation laws --------------------------------------------------

_BOUNDARY_KINDS = ("S", "E", "NS", "NE", "none")


def gen_smp_law(inv: Inventory, spec: SmpSpec, rng: Random, name: str | None = None) -> Rule:
    """Sample one law: environment size, boundary condition, phones, changes."""
    symbols = inv.symbols
    env_size = rng.choices((1, 2, 3), weights=spec.env_weights)[0]
    boundary = rng.choices(_BOUNDARY_KINDS, weights=spec.boundary_weights)[0]
    env_phones = [rng.choice(symbols) for _ in range(env_size)]
    num_changes = rng.randint(1, env_size)
    positions = sorted(rng.sample(range(env_size), num_changes))
    ops = [rng.choice(("add", "del", "sub")) for _ in range(num_changes)]

    predicates: list[Predicate] = []
    if boundary == "S":
        predicates += [WordStart(), IsNothing()]
    elif boundary == "NS":
        predicates += [Not(WordStart()), IsNothing()]
    base = len(predicates)
    for i, phone in enumerate(env_phones):
        if i:
            predicates.append(IsNothing())
        predicates.append(PhoneSet({phone}))
    if boundary == "E":
        predicates += [IsNothing(), WordEnd()]
    elif boundary == "NE":
        predicates += [IsNothing(), Not(WordEnd())]

    changes: list[tuple[int, MappingFn]] = []
    for pos, op in zip(positions, ops):
        token_index = base + 2 * pos
        if op == "del":
            changes.append((token_index, Delete()))
        elif op == "sub":
            source = env_phones[pos]
            target = rng.choice(symbols)
            while target == source and len(symbols) > 1:
                target = rng.choice(symbols)
            changes.append((token_index, Substitute({source: (target,)})))
        else:  # add: insert on the separator slot after this phone
            slot = token_index + 1
            if slot >= len(predicates):
                predicates.append(IsNothing())
            changes.append((slot, Insert((rng.choice(symbols),))))

    rule = Rule(
        predicates,
        [pos for pos, _ in changes],
        [fn for _, fn in changes],
        name=name,
    )
    rule.validate(inv)
    return rule


def environment_phones(rule: Rule, inv: Inventory | None = None) -> list[str]:
    """One concrete phone per phone predicate, in environment order."""
    phones: list[str] = []
    for pred in rule.predicates:
        if isinstance(pred, PhoneSet):
            phones.append(sorted(pred.phones)[0])
        elif isinstance(pred, FeatureReq) and inv is not None:
            matching = sorted(inv.matching_phones(pred.as_dict()))
            if matching:
                phones.append(matching[0])
    if not phones:
        raise GenerationError("environment contains no phone predicates")
    return phones


def gen_smp_examples(
    inv: Inventory,
    rule: Rule,
    n: int,
    rng: Random,
    name: str = "smp",
) -> SynthCase:
    """Protoforms by quota, reflexes by applying the law.

    Quotas at n examples: 3n/5 random words, n/10 with the environment as a
    prefix, n/10 as a suffix, n/10 with two occurrences and n/10 with three,
    the occurrences separated by random filler.  Random filler words have 1-6
    phones drawn uniformly from the inventory.
    """
    if n % 10 != 0 or n <= 0:
        raise ValueError("n must be a positive multiple of 10")
    env = environment_phones(rule, inv)
    symbols = inv.symbols

    def filler() -> list[str]:
        return [rng.choice(symbols) for _ in range(rng.randint(1, 6))]

    groups: list[tuple[str, int]] = [
        ("rand", 3 * n // 5),
        ("prefix", n // 10),
        ("suffix", n // 10),
        ("mid2", n // 10),
        ("mid3", n // 10),
    ]
    pairs: list[ExamplePair] = []
    for group, count in groups:
        for i in range(count):
            for _ in range(1000):
                if group == "rand":
                    phones = filler()
                elif group == "prefix":
                    phones = env + filler()
                elif group == "suffix":
                    phones = filler() + env
                elif group == "mid2":
                    phones = env + filler() + env
                else:
                    phones = env + filler() + env + filler() + env
                source = _canonical_word(inv, phones)
                if source is None:
                    continue
                target = apply_rule(rule, source, inv)
                if _roundtrips(inv, target):
                    break
            else:
                raise GenerationError(f"could not build a stable {group} word for {name}")
            pairs.append(ExamplePair(source, target, f"{group}-{i:03d}"))
    case = SynthCase(
        Cascade([rule]),
        Dataset(pairs, name=name, provenance="smp"),
        {"generator": "smp", "environment": env, "n": n},
    )
    verify_case(case, inv)
    return case


def gen_smp_corpus(inv: Inventory, spec: SmpSpec, laws: int) -> list[SynthCase]:
    """Independent cases, one per law, each on its own RNG stream."""
    cases = []
    for i in range(laws):
        rng = task_rng(spec.seed, "smp", i)
        rule = gen_smp_law(inv, spec, rng, name=f"smp-{i:04d}")
        cases.append(gen_smp_examples(inv, rule, spec.examples_per_law, rng, name=f"smp-{i:04d}"))
    return cases


# --- feature-driven laws --------------------------------------------------------


@dataclass
class SlotOps:
    delete: bool
    substitute: bool
    ins_before: bool
    ins_after: bool

    def any(self) -> bool:
        return self.delete or self.substitute or self.ins_before or self.ins_after


@dataclass
class LingStats:
    """Counts of sampled change operations, for conformance checks."""

    slots: int = 0
    deletions: int = 0
    substitutions: int = 0
    ins_before: int = 0
    ins_after: int = 0


def sample_change_ops(
    n_slots: int, spec: LingSpec, rng: Random, stats: LingStats | None = None
) -> list[SlotOps]:
    """Independent per-slot draws: delete, substitute, insert before/after."""
    slots = []
    for _ in range(n_slots):
        ops = SlotOps(
            rng.random() < spec.p_delete,
            rng.random() < spec.p_substitute,
            rng.random() < spec.p_insert,
            rng.random() < spec.p_insert,
        )
        if stats is not None:
            stats.slots += 1
            stats.deletions += ops.delete
            stats.substitutions += ops.substitute
            stats.ins_before += ops.ins_before
            stats.ins_after += ops.ins_after
        slots.append(ops)
    return slots


def _gaussian_length(rng: Random) -> int:
    return round(abs(rng.gauss(0.0, 1.0))) + 1


def _gated_requirements(anchor_features: tuple[int, ...], rng: Random) -> dict[int, int]:
    """Per-feature Gaussian gate; required values are taken from the anchor phone.

    Gating at |z| >= 1 keeps the requirement rate of fully blind sampling, but
    copying values from a phone actually occurring in the protoforms keeps the
    rejection loop convergent: at least the anchor window always satisfies the
    environment.  Unspecified anchor values yield no requirement.
    """
    reqs: dict[int, int] = {}
    for idx, value in enumerate(anchor_features):
        z = rng.gauss(0.0, 1.0)
        if (z <= -1.0 or z >= 1.0) and value in (0, 1):
            reqs[idx] = value
    return reqs


def _changeto_features(num_features: int, rng: Random) -> dict[int, int]:
    changes: dict[int, int] = {}
    for idx in range(num_features):
        z = rng.gauss(0.0, 1.0)
        if z <= -1.0:
            changes[idx] = 0
        elif z >= 1.0:
            changes[idx] = 1
    return changes


MAX_RULE_ATTEMPTS = 10_000


def gen_ling_rule(
    inv: Inventory,
    protos: Sequence[TokenizedWord],
    spec: LingSpec,
    rng: Random,
    stats: LingStats | None = None,
    name: str | None = None,
) -> Rule:
    """One feature-conditioned law applying to at least ``min_applicable`` protoforms.

    Rules that sample no change at all are vacuous and resampled.  Raises
    after the attempt cap.
    """
    if not protos:
        raise ValueError("no protoforms")
    symbols = inv.symbols
    for _ in range(MAX_RULE_ATTEMPTS):
        pre_len = _gaussian_length(rng)
        chg_len = _gaussian_length(rng)
        post_len = _gaussian_length(rng)
        total = pre_len + chg_len + post_len
        eligible = [w for w in protos if len(w.phones) >= total]
        if not eligible:
            continue
        anchor = rng.choice(eligible)
        start = rng.randrange(len(anchor.phones) - total + 1)
        window = anchor.phones[start : start + total]
        position_reqs = [
            _gated_requirements(inv.phone(phone).features, rng) for phone in window
        ]

        slots = sample_change_ops(chg_len, spec, rng, stats)

        changes: dict[int, MappingFn] = {}
        inserts: dict[int, list[str]] = {}
        effective = False
        for i, slot in enumerate(slots):
            phone_token = 2 * (pre_len + i)
            if slot.delete:
                changes[phone_token] = Delete()
                effective = True
            elif slot.substitute:
                target_features = _changeto_features(inv.num_features, rng)
                if target_features:
                    matching = sorted(inv.matching_phones(position_reqs[pre_len + i]))
                    mapping = {
                        sym: (realize_feature_change(inv.phone(sym), target_features, inv).symbol,)
                        for sym in matching
                    }
                    if mapping:
                        changes[phone_token] = Substitute(mapping)
                        effective = True
            if slot.ins_before:
                inserts.setdefault(phone_token - 1, []).append(rng.choice(symbols))
                effective = True
            if slot.ins_after:
                inserts.setdefault(phone_token + 1, []).append(rng.choice(symbols))
                effective = True
        if not effective:
            continue
        for slot_index, phones in inserts.items():
            changes[slot_index] = Insert(phones)

        predicates: list[Predicate] = []
        for i, reqs in enumerate(position_reqs):
            if i:
                predicates.append(IsNothing())
            predicates.append(FeatureReq(reqs))
        ordered = sorted(changes.items())
        rule = Rule(predicates, [p for p, _ in ordered], [fn for _, fn in ordered], name=name)
        rule.validate(inv)

        applies = sum(1 for w in protos if find_sites(rule, w, inv))
        if applies >= spec.min_applicable:
            return rule
    raise GenerationError(f"no applicable rule found after {MAX_RULE_ATTEMPTS} attempts")


def gen_ling_language(
    inv: Inventory,
    spec: LingSpec,
    rng: Random,
    name: str = "ling",
    stats: LingStats | None = None,
) -> SynthCase:
    """Nonce protoforms plus a cascade of rules, each conditioned on the last."""
    profile_name = rng.choice(sorted(PROFILES))
    profile = PROFILES[profile_name]
    protos = [nonce_word(inv, profile, rng) for _ in range(spec.protoforms_per_language)]
    rules: list[Rule] = []
    current = list(protos)
    for k in range(spec.rules_per_language):
        rule = gen_ling_rule(inv, current, spec, rng, stats, name=f"{name}-r{k}")
        rules.append(rule)
        current = [apply_rule(rule, w, inv) for w in current]
    pairs = [
        ExamplePair(source, target, f"w{i:03d}")
        for i, (source, target) in enumerate(zip(protos, current))
    ]
    case = SynthCase(
        Cascade(rules),
        Dataset(pairs, name=name, language=profile_name, provenance="ling"),
        {"generator": "ling", "profile": profile_name},
    )
    verify_case(case, inv)
    return case


def gen_ling_corpus(
    inv: Inventory, spec: LingSpec, stats: LingStats | None = None
) -> list[SynthCase]:
    """One language per task stream; regenerates a language only when its
    targets would not survive a file round-trip."""
    cases = []
    for i in range(spec.num_languages):
        for retry in range(50):
            rng = task_rng(spec.seed, "ling", i, retry)
            case = gen_ling_language(inv, spec, rng, name=f"ling-{i:04d}", stats=stats)
            if all(_roundtrips(inv, p.target) for p in case.dataset.pairs):
                break
        else:
            raise GenerationError(f"language {i} never produced round-trip-stable targets")
        cases.append(case)
    return cases


# --- multi-law evaluation sets ---------------------------------------------------

MULTILAW_DRAW_BUDGET = 50_000


def gen_multilaw_evalset(
    inv: Inventory,
    cascade_pool: Cascade,
    rules_per_set: int,
    sets: int,
    words_per_set: int,
    rng: Random,
) -> list[SynthCase]:
    """Per set: an order-preserving rule subsample plus words of which at
    least half remain unchanged under the sampled cascade."""
    if len(cascade_pool) < rules_per_set:
        raise ValueError(
            f"pool holds {len(cascade_pool)} rules, need at least {rules_per_set}"
        )
    cases: list[SynthCase] = []
    for set_index in range(sets):
        indices = sorted(rng.sample(range(len(cascade_pool.rules)), rules_per_set))
        cascade = Cascade(cascade_pool.rules[i] for i in indices)
        profile_name = rng.choice(sorted(PROFILES))
        profile = PROFILES[profile_name]
        unchanged_quota = (words_per_set + 1) // 2
        changed_quota = words_per_set - unchanged_quota
        pairs: list[ExamplePair] = []
        unchanged = changed = 0
        draws = 0
        while len(pairs) < words_per_set:
            draws += 1
            if draws > MULTILAW_DRAW_BUDGET:
                raise GenerationError(
                    f"draw budget exhausted while building set {set_index} "
                    f"({changed}/{changed_quota} changed, {unchanged}/{unchanged_quota} unchanged)"
                )
            if changed < changed_quota:
                source = _seeded_word(inv, cascade, profile, rng)
            else:
                source = nonce_word(inv, profile, rng)
            target, _ = apply_cascade(cascade, source, inv)
            if not _roundtrips(inv, target):
                continue
            if source == target:
                if unchanged >= unchanged_quota:
                    continue
                unchanged += 1
            else:
                if changed >= changed_quota:
                    continue
                changed += 1
            pairs.append(ExamplePair(source, target, f"w{len(pairs):03d}"))
        case = SynthCase(
            cascade,
            Dataset(pairs, name=f"set-{set_index:02d}", language=profile_name, provenance="multilaw"),
            {
                "generator": "multilaw",
                "set": set_index,
                "pool_indices": indices,
                "profile": profile_name,
            },
        )
        verify_case(case, inv)
        cases.append(case)
    return cases


def _seeded_word(
    inv: Inventory, cascade: Cascade, profile: "NonceProfile", rng: Random
) -> TokenizedWord:
    """A nonce word with one rule's environment string embedded, when possible."""
    rule = rng.choice(cascade.rules)
    try:
        env = environment_phones(rule, inv)
    except GenerationError:
        return nonce_word(inv, profile, rng)
    for _ in range(200):
        base = list(nonce_word(inv, profile, rng).phones)
        mode = rng.choice(("prefix", "suffix", "mid"))
        if mode == "prefix":
            phones = env + base
        elif mode == "suffix":
            phones = base + env
        else:
            cut = rng.randint(0, len(base))
            phones = base[:cut] + env + base[cut:]
        word = _canonical_word(inv, phones)
        if word is not None:
            return word
    return nonce_word(inv, profile, rng)


# --- nonce words ------------------------------------------------------------------


@dataclass(frozen=True)
class NonceProfile:
    """Phonotactics of one pseudo-language: CV(C) syllables over weighted classes."""

    onsets: tuple[str, ...]
    vowels: tuple[str, ...]
    codas: tuple[str, ...]
    coda_prob: float
    syllable_weights: tuple[float, float, float] = (0.3, 0.45, 0.25)


PROFILES: dict[str, NonceProfile] = {
    "nld": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "s", "z", "f", "v", "x", "ɣ", "m", "n", "l", "r", "ʋ", "j", "h"),
        vowels=("i", "ɪ", "e", "ɛ", "a", "ɑ", "ɔ", "o", "u", "ʏ", "ø", "ə"),
        codas=("p", "t", "k", "s", "f", "x", "m", "n", "ŋ", "l", "r"),
        coda_prob=0.55,
    ),
    "fra": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "ɡ", "f", "v", "s", "z", "ʃ", "ʒ", "m", "n", "ɲ", "l", "ʁ", "j", "w"),
        vowels=("i", "e", "ɛ", "a", "ɑ", "ɔ", "o", "u", "y", "ø", "œ", "ə", "ẽ", "ã", "õ"),
        codas=("p", "t", "k", "f", "s", "ʃ", "m", "n", "l", "ʁ"),
        coda_prob=0.3,
    ),
    "deu": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "ɡ", "f", "v", "s", "z", "ʃ", "m", "n", "l", "ʁ", "ç", "x", "h", "j", "ts"),
        vowels=("i", "ɪ", "e", "ɛ", "a", "ɔ", "o", "u", "ʊ", "y", "ʏ", "ø", "œ", "ə"),
        codas=("p", "t", "k", "f", "s", "ʃ", "ç", "x", "m", "n", "ŋ", "l", "ʁ"),
        coda_prob=0.6,
    ),
    "ita": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "ɡ", "f", "v", "s", "z", "ʃ", "m", "n", "ɲ", "l", "ʎ", "r", "j", "w", "ts", "dz", "tʃ", "dʒ"),
        vowels=("i", "e", "ɛ", "a", "ɔ", "o", "u"),
        codas=("n", "m", "l", "r", "s"),
        coda_prob=0.15,
    ),
    "pol": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "ɡ", "f", "v", "s", "z", "ʂ", "ʐ", "ɕ", "ʑ", "x", "m", "n", "ɲ", "l", "r", "j", "w", "ts", "tʃ"),
        vowels=("i", "ɨ", "ɛ", "a", "ɔ", "u"),
        codas=("p", "t", "k", "f", "s", "ʂ", "x", "m", "n", "ɲ", "l", "r", "j", "w"),
        coda_prob=0.5,
    ),
    "spa": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "ɡ", "f", "s", "x", "m", "n", "ɲ", "l", "ʎ", "r", "ɾ", "j", "w", "tʃ", "β", "ð", "ɣ", "θ"),
        vowels=("i", "e", "a", "o", "u"),
        codas=("s", "n", "l", "r", "ð"),
        coda_prob=0.35,
    ),
    "vie": NonceProfile(
        onsets=("p", "b", "t", "d", "k", "f", "v", "s", "z", "x", "h", "m", "n", "ɲ", "ŋ", "l", "j", "w", "c", "ʔ", "tʃ"),
        vowels=("i", "e", "ɛ", "a", "ɐ", "ɔ", "o", "u", "ɯ", "ə"),
        codas=("p", "t", "k", "m", "n", "ŋ"),
        coda_prob=0.5,
        syllable_weights=(0.6, 0.35, 0.05),
    ),
}


def nonce_word(inv: Inventory, profile: NonceProfile, rng: Random) -> TokenizedWord:
    """One CV(C) nonce word of 1-3 syllables, stable under re-tokenization."""
    for _ in range(1000):
        syllables = rng.choices((1, 2, 3), weights=profile.syllable_weights)[0]
        phones: list[str] = []
        for _ in range(syllables):
            phones.append(rng.choice(profile.onsets))
            phones.append(rng.choice(profile.vowels))
            if rng.random() < profile.coda_prob:
                phones.append(rng.choice(profile.codas))
        word = _canonical_word(inv, phones)
        if word is not None:
            return word
    raise GenerationError("could not build a re-tokenization-stable nonce word")


# --- corpus writing ----------------------------------------------------------------


def write_corpus(out_dir: str, cases: Sequence[SynthCase], manifest: dict) -> None:
    """Write ``case_<idx>/{rule.json|cascade.json,pairs.tsv}`` plus a manifest."""
    os.makedirs(out_dir, exist_ok=True)
    from cascade_forge.rule_engine import cascade_to_obj, rule_to_obj

    for index, case in enumerate(cases):
        case_dir = os.path.join(out_dir, f"case_{index:04d}")
        os.makedirs(case_dir, exist_ok=True)
        if len(case.ground_truth) == 1:
            _atomic_write(
                os.path.join(case_dir, "rule.json"),
                _dumps(rule_to_obj(case.ground_truth.rules[0])),
            )
        else:
            _atomic_write(
                os.path.join(case_dir, "cascade.json"),
                _dumps(cascade_to_obj(case.ground_truth)),
            )
        lines = [
            f"{pair.source.surface}\t{pair.target.surface}" for pair in case.dataset.pairs
        ]
        _atomic_write(os.path.join(case_dir, "pairs.tsv"), "\n".join(lines) + "\n")
    full_manifest = dict(manifest)
    full_manifest["cases"] = len(cases)
    full_manifest["generator_version"] = GENERATOR_VERSION
    _atomic_write(os.path.join(out_dir, "manifest.json"), _dumps(full_manifest))


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
