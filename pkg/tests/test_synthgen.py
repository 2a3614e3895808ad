import json
import os

import pytest

from cascade_forge.phonology import tokenize
from cascade_forge.rule_engine import (
    Cascade,
    FeatureReq,
    IsNothing,
    Not,
    PhoneSet,
    Substitute,
    WordEnd,
    WordStart,
    apply_cascade,
    apply_rule,
    find_sites,
)
from cascade_forge.synthgen import (
    GenerationError,
    LingSpec,
    LingStats,
    PROFILES,
    SmpSpec,
    environment_phones,
    gen_ling_language,
    gen_ling_rule,
    gen_multilaw_evalset,
    gen_smp_corpus,
    gen_smp_examples,
    gen_smp_law,
    nonce_word,
    sample_change_ops,
    task_rng,
    verify_case,
    write_corpus,
)


def boundary_kind(rule):
    first, last = rule.predicates[0], rule.predicates[-1]
    if isinstance(first, WordStart):
        return "S"
    if isinstance(first, Not) and isinstance(first.inner, WordStart):
        return "NS"
    if isinstance(last, WordEnd):
        return "E"
    if isinstance(last, Not) and isinstance(last.inner, WordEnd):
        return "NE"
    return "none"


def env_size(rule):
    return sum(isinstance(p, PhoneSet) for p in rule.predicates)


# --- smp laws -------------------------------------------------------------------


def test_smp_spec_validation():
    with pytest.raises(ValueError):
        SmpSpec(examples_per_law=55)
    with pytest.raises(ValueError):
        SmpSpec(env_weights=(0.5, 0.2, 0.1))


def test_smp_forced_env_size_one(default_inv):
    spec = SmpSpec(env_weights=(1.0, 0.0, 0.0), boundary_weights=(0, 0, 0, 0, 1.0))
    for i in range(20):
        rule = gen_smp_law(default_inv, spec, task_rng(1, "e1", i))
        assert env_size(rule) == 1
        assert boundary_kind(rule) == "none"


def test_smp_forced_word_end_boundary(default_inv):
    spec = SmpSpec(boundary_weights=(0, 1.0, 0, 0, 0))
    for i in range(20):
        rule = gen_smp_law(default_inv, spec, task_rng(2, "be", i))
        assert isinstance(rule.predicates[-1], WordEnd)


def test_smp_minimal_substitution_shape(default_inv):
    spec = SmpSpec(env_weights=(1.0, 0.0, 0.0), boundary_weights=(0, 0, 0, 0, 1.0))
    for i in range(200):
        rule = gen_smp_law(default_inv, spec, task_rng(3, "shape", i))
        if len(rule.mappings) == 1 and isinstance(rule.mappings[0], Substitute):
            assert len(rule.predicates) == 1
            assert isinstance(rule.predicates[0], PhoneSet)
            assert rule.change_pos == (0,)
            source = next(iter(rule.predicates[0].phones))
            assert rule.mappings[0].get(source) is not None
            return
    pytest.fail("no substitution-only law sampled in 200 draws")


def test_smp_substitution_never_maps_to_itself(default_inv):
    spec = SmpSpec()
    for i in range(100):
        rule = gen_smp_law(default_inv, spec, task_rng(4, "noid", i))
        for fn in rule.mappings:
            if isinstance(fn, Substitute):
                for old, new in fn.mapping:
                    assert new != (old,)


def test_smp_examples_quota_counts(default_inv):
    rng = task_rng(5, "quota", 0)
    rule = gen_smp_law(default_inv, SmpSpec(), rng)
    case = gen_smp_examples(default_inv, rule, 50, rng)
    groups = {}
    for pair in case.dataset.pairs:
        groups.setdefault(pair.id.rsplit("-", 1)[0], []).append(pair)
    assert {k: len(v) for k, v in groups.items()} == {
        "rand": 30, "prefix": 5, "suffix": 5, "mid2": 5, "mid3": 5,
    }
    env = tuple(case.provenance["environment"])
    width = len(env)

    def occurrences(phones):
        return sum(1 for i in range(len(phones) - width + 1) if phones[i:i + width] == env)

    for pair in groups["prefix"]:
        assert pair.source.phones[:width] == env
    for pair in groups["suffix"]:
        assert pair.source.phones[-width:] == env
    for pair in groups["mid2"]:
        assert occurrences(pair.source.phones) >= 2
    for pair in groups["mid3"]:
        assert occurrences(pair.source.phones) >= 3
    containing = sum(1 for p in case.dataset.pairs if occurrences(p.source.phones) >= 1)
    assert containing >= 20  # at least 2N/5


def test_smp_examples_reproduce_targets(default_inv):
    for i in range(10):
        rng = task_rng(6, "repro", i)
        rule = gen_smp_law(default_inv, SmpSpec(), rng)
        case = gen_smp_examples(default_inv, rule, 50, rng)
        verify_case(case, default_inv)
        for pair in case.dataset.pairs:
            assert apply_rule(rule, pair.source, default_inv) == pair.target


def test_smp_examples_survive_file_roundtrip(default_inv):
    rng = task_rng(7, "file", 0)
    rule = gen_smp_law(default_inv, SmpSpec(), rng)
    case = gen_smp_examples(default_inv, rule, 50, rng)
    for pair in case.dataset.pairs:
        assert tokenize(pair.source.surface, default_inv) == pair.source
        assert tokenize(pair.target.surface, default_inv) == pair.target


def test_smp_requires_multiple_of_ten(default_inv):
    rng = task_rng(8, "n", 0)
    rule = gen_smp_law(default_inv, SmpSpec(), rng)
    with pytest.raises(ValueError):
        gen_smp_examples(default_inv, rule, 55, rng)


def test_environment_phones_requires_phone_predicate():
    rule_like = type("R", (), {"predicates": (IsNothing(),)})()
    with pytest.raises(GenerationError):
        environment_phones(rule_like)


# --- feature-driven laws -----------------------------------------------------------


def test_change_op_rates_are_plausible():
    spec = LingSpec()
    stats = LingStats()
    rng = task_rng(9, "rates")
    sample_change_ops(20000, spec, rng, stats)
    assert abs(stats.deletions / stats.slots - 1 / 8) < 0.01
    assert abs(stats.substitutions / stats.slots - 1 / 8) < 0.01
    assert abs(stats.ins_before / stats.slots - 1 / 16) < 0.008
    assert abs(stats.ins_after / stats.slots - 1 / 16) < 0.008


def test_ling_rule_applies_to_min_protoforms(default_inv):
    spec = LingSpec()
    for i in range(5):
        rng = task_rng(10, "apply", i)
        profile = PROFILES[rng.choice(sorted(PROFILES))]
        protos = [nonce_word(default_inv, profile, rng) for _ in range(50)]
        rule = gen_ling_rule(default_inv, protos, spec, rng)
        applies = sum(1 for w in protos if find_sites(rule, w, default_inv))
        assert applies >= spec.min_applicable


def test_ling_rule_is_never_vacuous(default_inv):
    spec = LingSpec()
    for i in range(5):
        rng = task_rng(11, "novac", i)
        profile = PROFILES[rng.choice(sorted(PROFILES))]
        protos = [nonce_word(default_inv, profile, rng) for _ in range(50)]
        rule = gen_ling_rule(default_inv, protos, spec, rng)
        assert rule.mappings  # at least one change function
        assert all(isinstance(p, (FeatureReq, IsNothing)) for p in rule.predicates)


def test_ling_language_shape_and_invariant(default_inv):
    spec = LingSpec(num_languages=1)
    rng = task_rng(12, "lang", 0)
    case = gen_ling_language(default_inv, spec, rng, name="lang-0")
    assert len(case.ground_truth) == 3
    assert len(case.dataset) == 50
    verify_case(case, default_inv)
    final, trace = apply_cascade(case.ground_truth, case.dataset.pairs[0].source, default_inv)
    assert len(trace) == 3
    assert final == case.dataset.pairs[0].target


def test_ling_language_deterministic(default_inv):
    spec = LingSpec()
    one = gen_ling_language(default_inv, spec, task_rng(13, "det"), name="x")
    two = gen_ling_language(default_inv, spec, task_rng(13, "det"), name="x")
    assert one.ground_truth == two.ground_truth
    assert [p.source for p in one.dataset.pairs] == [p.source for p in two.dataset.pairs]


def test_ling_rule_requires_protoforms(default_inv):
    with pytest.raises(ValueError):
        gen_ling_rule(default_inv, [], LingSpec(), task_rng(14, "empty"))


def test_ling_rule_attempt_cap_exhausts(default_inv):
    # single-phone protoforms can never host a pre+change+post window
    from cascade_forge.phonology import TokenizedWord
    protos = [TokenizedWord.from_phones(["a"]) for _ in range(4)]
    spec = LingSpec(min_applicable=3, protoforms_per_language=4)
    with pytest.raises(GenerationError, match="no applicable rule"):
        gen_ling_rule(default_inv, protos, spec, task_rng(14, "cap"))


# --- nonce words -----------------------------------------------------------------------


def test_nonce_words_are_inventory_valid(default_inv):
    for name, profile in PROFILES.items():
        for symbol in (*profile.onsets, *profile.vowels, *profile.codas):
            assert symbol in default_inv, f"{name}: {symbol}"
        rng = task_rng(15, "nonce", name)
        for _ in range(50):
            word = nonce_word(default_inv, profile, rng)
            assert 2 <= len(word.phones) <= 9
            assert tokenize(word.surface, default_inv) == word


# --- multi-law sets -----------------------------------------------------------------------


def make_pool(inv, count, seed=16):
    spec = SmpSpec(seed=seed)
    return Cascade([
        gen_smp_law(inv, spec, task_rng(seed, "pool", i), name=f"pool-{i}")
        for i in range(count)
    ])


def test_multilaw_shape_and_balance(default_inv):
    pool = make_pool(default_inv, 12)
    cases = gen_multilaw_evalset(default_inv, pool, rules_per_set=5, sets=3,
                                 words_per_set=20, rng=task_rng(17, "ml"))
    assert len(cases) == 3
    for case in cases:
        assert len(case.ground_truth) == 5
        assert len(case.dataset) == 20
        unchanged = sum(1 for p in case.dataset.pairs if p.source == p.target)
        assert unchanged >= 10
        verify_case(case, default_inv)


def test_multilaw_preserves_pool_order(default_inv):
    pool = make_pool(default_inv, 10)
    cases = gen_multilaw_evalset(default_inv, pool, 4, 5, 10, task_rng(18, "order"))
    for case in cases:
        indices = case.provenance["pool_indices"]
        assert indices == sorted(indices)
        assert tuple(case.ground_truth.rules) == tuple(pool.rules[i] for i in indices)


def test_multilaw_rejects_small_pool(default_inv):
    pool = make_pool(default_inv, 3)
    with pytest.raises(ValueError):
        gen_multilaw_evalset(default_inv, pool, 5, 1, 10, task_rng(19, "small"))


# --- corpus writing and determinism --------------------------------------------------------


def corpus_tree(root):
    tree = {}
    for base, _, files in os.walk(root):
        for name in files:
            path = os.path.join(base, name)
            tree[os.path.relpath(path, root)] = open(path, "rb").read()
    return tree


def test_write_corpus_layout(default_inv, tmp_path):
    cases = gen_smp_corpus(default_inv, SmpSpec(examples_per_law=20, seed=20), laws=2)
    out = tmp_path / "corpus"
    write_corpus(str(out), cases, {"generator": "smp", "seed": 20})
    assert (out / "manifest.json").exists()
    assert (out / "case_0000" / "rule.json").exists()
    assert (out / "case_0000" / "pairs.tsv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cases"] == 2
    lines = (out / "case_0000" / "pairs.tsv").read_text().splitlines()
    assert len(lines) == 20
    assert all("\t" in line for line in lines)


def test_corpus_generation_is_byte_deterministic(default_inv, tmp_path):
    spec = SmpSpec(examples_per_law=20, seed=21)
    for name in ("one", "two"):
        cases = gen_smp_corpus(default_inv, spec, laws=3)
        write_corpus(str(tmp_path / name), cases, {"generator": "smp", "seed": 21})
    one, two = corpus_tree(tmp_path / "one"), corpus_tree(tmp_path / "two")
    assert one == two


def test_multilaw_cases_write_cascades(default_inv, tmp_path):
    pool = make_pool(default_inv, 8)
    cases = gen_multilaw_evalset(default_inv, pool, 3, 1, 10, task_rng(22, "write"))
    write_corpus(str(tmp_path / "ml"), cases, {"generator": "multilaw"})
    assert (tmp_path / "ml" / "case_0000" / "cascade.json").exists()
