import random

import pytest

from cascade_forge.phonology import TokenizedWord, detokenize, tokenize, validate_word
from cascade_forge.rule_engine import (
    Cascade,
    Delete,
    FeatureReq,
    Insert,
    IsNothing,
    Not,
    PhoneSet,
    Rule,
    RuleError,
    RuleParseError,
    Substitute,
    WordEnd,
    WordStart,
    apply_cascade,
    apply_rule,
    find_sites,
    match_predicate,
    parse_cascade,
    parse_rule,
    serialize_cascade,
    serialize_rule,
)
from cascade_forge.synthgen import LingSpec, SmpSpec, gen_ling_rule, gen_smp_law, nonce_word, PROFILES, task_rng

from oracles import reference_apply, scan_sites


def sub_rule(env, pos, old, new, name=None):
    predicates = []
    for i, phone in enumerate(env):
        if i:
            predicates.append(IsNothing())
        predicates.append(PhoneSet({phone}))
    return Rule(predicates, [2 * pos], [Substitute({old: (new,)})], name=name)


A_TO_E_BEFORE_J = sub_rule("aj", 0, "a", "e", name="a>e/_j")


# --- predicates ---------------------------------------------------------------


def test_match_phone_set():
    pred = PhoneSet({"a"})
    assert match_predicate(pred, "a", False, False)
    assert not match_predicate(pred, "b", False, False)
    assert not match_predicate(pred, "@", False, False)


def test_match_is_nothing():
    assert match_predicate(IsNothing(), "@", False, False)
    assert not match_predicate(IsNothing(), "a", False, False)
    assert not match_predicate(IsNothing(), "#", True, False)


def test_match_boundaries_are_positional():
    assert match_predicate(WordStart(), "#", True, False)
    assert not match_predicate(WordStart(), "#", False, True)
    assert match_predicate(WordEnd(), "#", False, True)
    assert not match_predicate(WordEnd(), "#", True, False)
    assert not match_predicate(WordEnd(), "a", False, True)


def test_match_not_inverts():
    assert not match_predicate(Not(WordStart()), "#", True, False)
    assert match_predicate(Not(WordStart()), "a", False, False)
    assert match_predicate(Not(PhoneSet({"a"})), "@", False, False)


def test_match_feature_req(tiny_inv):
    pred = FeatureReq({0: 1})  # syllabic
    assert match_predicate(pred, "a", False, False, tiny_inv)
    assert not match_predicate(pred, "t", False, False, tiny_inv)
    # structural tokens never satisfy a feature requirement
    assert not match_predicate(pred, "#", True, False, tiny_inv)
    assert not match_predicate(pred, "@", False, False, tiny_inv)


def test_match_feature_req_needs_inventory():
    with pytest.raises(RuleError, match="inventory"):
        match_predicate(FeatureReq({0: 1}), "a", False, False, None)


# --- find_sites -----------------------------------------------------------------


def test_find_sites_env_in_middle(tiny_inv):
    word = tokenize("kaj", tiny_inv)
    assert find_sites(A_TO_E_BEFORE_J, word) == [4]  # index of "a"


def test_find_sites_absent_environment(tiny_inv):
    assert find_sites(A_TO_E_BEFORE_J, tokenize("ku", tiny_inv)) == []


def test_find_sites_overlapping_all_recorded(tiny_inv):
    rule = Rule([PhoneSet({"a"})], [0], [Substitute({"a": ("e",)})])
    word = tokenize("aaa", tiny_inv)
    assert find_sites(rule, word) == [2, 4, 6]


def test_find_sites_window_never_past_end(tiny_inv):
    rule = sub_rule("aaaa", 0, "a", "e")
    word = tokenize("aa", tiny_inv)  # 7 tokens < env of 7 fits exactly once? env covers 4 phones
    assert find_sites(rule, word) == []


def test_find_sites_matches_window_scan_oracle(tiny_inv):
    rng = random.Random(4)
    symbols = tiny_inv.symbols
    for _ in range(300):
        env = "".join(rng.choice("aeiutk") for _ in range(rng.randint(1, 3)))
        rule = sub_rule(env, 0, env[0], "u")
        phones = [rng.choice(symbols) for _ in range(rng.randint(0, 6))]
        word = TokenizedWord.from_phones(phones)
        assert find_sites(rule, word, tiny_inv) == scan_sites(rule, word, tiny_inv)


# --- apply_rule -------------------------------------------------------------------


def test_apply_substitution(tiny_inv):
    out = apply_rule(A_TO_E_BEFORE_J, tokenize("aj", tiny_inv))
    assert detokenize(out) == "ej"


def test_apply_word_final_insertion(tiny_inv):
    rule = Rule([PhoneSet({"i"}), IsNothing(), WordEnd()], [1], [Insert(("k",))])
    assert detokenize(apply_rule(rule, tokenize("ti", tiny_inv))) == "tik"


def test_apply_insertion_does_not_self_feed(tiny_inv):
    rule = Rule([PhoneSet({"a"}), IsNothing()], [1], [Insert(("a",))])
    out = apply_rule(rule, tokenize("ba", tiny_inv))
    assert detokenize(out) == "baa"
    # a second pass sees two sites (both a's) and stays bounded: one insert per site
    assert detokenize(apply_rule(rule, out)) == "baaaa"


def test_apply_sites_detected_on_original_only(tiny_inv):
    # a -> aa after a: "aa" has one site (the first a), giving "aaa" not more
    rule = Rule([PhoneSet({"a"}), IsNothing(), PhoneSet({"a"})], [0],
                [Substitute({"a": ("a", "a")})])
    assert detokenize(apply_rule(rule, tokenize("aa", tiny_inv))) == "aaa"


def test_apply_overlap_conflict_leftmost_wins(tiny_inv):
    # both positions of [a @ a] deleted; on "aaa" the two sites overlap at the middle a
    rule = Rule(
        [PhoneSet({"a"}), IsNothing(), PhoneSet({"a"})],
        [0, 2],
        [Delete(), Delete()],
    )
    diagnostics = []
    out = apply_rule(rule, tokenize("aaa", tiny_inv), diagnostics=diagnostics)
    assert detokenize(out) == ""
    assert any("conflict" in d for d in diagnostics)


def test_apply_partial_substitute_is_noop_with_diagnostic(tiny_inv):
    rule = Rule([PhoneSet({"a", "e"})], [0], [Substitute({"a": ("u",)})])
    diagnostics = []
    out = apply_rule(rule, tokenize("ea", tiny_inv), diagnostics=diagnostics)
    assert detokenize(out) == "eu"
    assert any("no substitute entry" in d for d in diagnostics)


def test_apply_preserves_canonical_structure(tiny_inv):
    rng = random.Random(9)
    for _ in range(200):
        env = "".join(rng.choice("aeiu") for _ in range(rng.randint(1, 2)))
        kind = rng.choice(("del", "sub", "ins"))
        if kind == "del":
            rule = Rule([PhoneSet({env[0]})], [0], [Delete()])
        elif kind == "sub":
            rule = sub_rule(env, 0, env[0], rng.choice("tk"))
        else:
            rule = Rule([PhoneSet({env[0]}), IsNothing()], [1], [Insert((rng.choice("tk"),))])
        phones = [rng.choice(tiny_inv.symbols) for _ in range(rng.randint(0, 5))]
        out = apply_rule(rule, TokenizedWord.from_phones(phones), tiny_inv)
        validate_word(out, tiny_inv)


def test_apply_output_length_bounded(tiny_inv):
    rng = random.Random(13)
    for _ in range(200):
        insert_len = rng.randint(1, 3)
        rule = Rule(
            [PhoneSet({"a"}), IsNothing()],
            [1],
            [Insert(tuple(rng.choice("tk") for _ in range(insert_len)))],
        )
        phones = [rng.choice(tiny_inv.symbols) for _ in range(rng.randint(0, 6))]
        word = TokenizedWord.from_phones(phones)
        sites = find_sites(rule, word, tiny_inv)
        out = apply_rule(rule, word, tiny_inv)
        assert len(out.phones) <= len(word.phones) + len(sites) * insert_len


def test_apply_matches_reference_on_random_generated_rules(default_inv):
    rng = random.Random(21)
    spec = SmpSpec()
    profiles = sorted(PROFILES)
    for i in range(300):
        rule = gen_smp_law(default_inv, spec, rng)
        profile = PROFILES[rng.choice(profiles)]
        word = nonce_word(default_inv, profile, rng)
        assert apply_rule(rule, word, default_inv) == reference_apply(rule, word, default_inv)


def test_apply_matches_reference_on_feature_rules(default_inv):
    spec = LingSpec(min_applicable=2, protoforms_per_language=20)
    for i in range(20):
        rng = task_rng(31, "ref", i)
        profile = PROFILES[rng.choice(sorted(PROFILES))]
        protos = [nonce_word(default_inv, profile, rng) for _ in range(20)]
        rule = gen_ling_rule(default_inv, protos, spec, rng)
        for word in protos:
            assert apply_rule(rule, word, default_inv) == reference_apply(rule, word, default_inv)


# --- cascades ---------------------------------------------------------------------


def test_empty_cascade_is_identity(tiny_inv):
    word = tokenize("kat", tiny_inv)
    out, trace = apply_cascade(Cascade(), word)
    assert out == word
    assert trace == []


def test_cascade_order_matters(tiny_inv):
    a_to_o = Rule([PhoneSet({"a"}), IsNothing(), PhoneSet({"k"})], [0],
                  [Substitute({"a": ("u",)})])
    k_to_t = Rule([PhoneSet({"k"}), IsNothing(), WordEnd()], [0],
                  [Substitute({"k": ("t",)})])
    word = tokenize("ak", tiny_inv)
    out1, trace1 = apply_cascade(Cascade([a_to_o, k_to_t]), word)
    assert detokenize(out1) == "ut"
    assert len(trace1) == 2
    out2, _ = apply_cascade(Cascade([k_to_t, a_to_o]), word)
    assert detokenize(out2) == "at"


def test_cascade_is_a_fold(tiny_inv):
    r1 = sub_rule("a", 0, "a", "e")
    r2 = sub_rule("e", 0, "e", "i")
    word = tokenize("aka", tiny_inv)
    folded, _ = apply_cascade(Cascade([r1, r2]), word)
    assert folded == apply_rule(r2, apply_rule(r1, word))


# --- validation and serialization ----------------------------------------------


def test_rule_validation_errors():
    with pytest.raises(RuleError):
        Rule([], [0], [Delete()]).validate()
    with pytest.raises(RuleError, match="outside"):
        Rule([PhoneSet({"a"})], [3], [Delete()]).validate()
    with pytest.raises(RuleError, match="duplicate"):
        Rule([PhoneSet({"a"})], [0, 0], [Delete(), Delete()]).validate()
    with pytest.raises(RuleError, match="is-nothing"):
        Rule([PhoneSet({"a"})], [0], [Insert(("k",))]).validate()
    with pytest.raises(RuleError, match="phone-matching"):
        Rule([IsNothing()], [0], [Delete()]).validate()
    with pytest.raises(RuleError, match="mappings"):
        Rule([PhoneSet({"a"})], [0], [Delete(), Delete()]).validate()


def test_rule_validation_against_inventory(tiny_inv):
    rule = Rule([PhoneSet({"zz"})], [0], [Delete()])
    rule.validate()  # structurally fine
    with pytest.raises(RuleError, match="not in inventory"):
        rule.validate(tiny_inv)


def test_serialize_roundtrip_example_rule():
    text = serialize_rule(A_TO_E_BEFORE_J)
    parsed = parse_rule(text)
    assert parsed == A_TO_E_BEFORE_J
    assert serialize_rule(parsed) == text


def test_name_excluded_from_equality():
    named = sub_rule("aj", 0, "a", "e", name="a label")
    anonymous = sub_rule("aj", 0, "a", "e")
    assert named == anonymous
    assert parse_rule(serialize_rule(named)).name == "a label"


def test_serialization_is_canonical():
    rule1 = Rule([PhoneSet(["b", "a"])], [0], [Delete()])
    rule2 = Rule([PhoneSet(["a", "b"])], [0], [Delete()])
    assert serialize_rule(rule1) == serialize_rule(rule2)


def test_parse_errors_carry_paths():
    with pytest.raises(RuleParseError, match="/predicates/0/kind"):
        parse_rule('{"predicates":[{"kind":"nope"}],"change_pos":[0],"mappings":[{"kind":"delete"}]}')
    with pytest.raises(RuleParseError, match="change position 5 outside"):
        parse_rule('{"predicates":[{"kind":"phone_set","phones":["a"]}],"change_pos":[5],"mappings":[{"kind":"delete"}]}')
    with pytest.raises(RuleParseError):
        parse_rule("not json")
    with pytest.raises(RuleParseError, match="phones"):
        parse_rule('{"predicates":[{"kind":"phone_set","phones":[]}],"change_pos":[0],"mappings":[{"kind":"delete"}]}')


def test_random_rules_roundtrip(default_inv):
    spec = SmpSpec()
    ling_spec = LingSpec(min_applicable=2, protoforms_per_language=15)
    count = 0
    for i in range(1000):
        rng = task_rng(77, "roundtrip", i)
        if i % 10 == 0 and count < 30:
            profile = PROFILES[rng.choice(sorted(PROFILES))]
            protos = [nonce_word(default_inv, profile, rng) for _ in range(15)]
            rule = gen_ling_rule(default_inv, protos, ling_spec, rng)
            count += 1
        else:
            rule = gen_smp_law(default_inv, spec, rng)
        text = serialize_rule(rule)
        parsed = parse_rule(text, default_inv)
        assert parsed == rule
        assert serialize_rule(parsed) == text


def test_cascade_roundtrip(tiny_inv):
    cascade = Cascade([A_TO_E_BEFORE_J, sub_rule("e", 0, "e", "i")])
    text = serialize_cascade(cascade)
    assert parse_cascade(text) == cascade
