"""Executable sound-law rules and cascades.

A rule is an environment (a list of predicates over consecutive tokens)
plus change positions and mapping functions.  Application is two-stage:
all match sites are detected on the unmodified input first, then every
mapping is applied at every recorded site.  Because detection never sees
material produced by the rule itself, a rule cannot feed its own
environment ("suppression of self-feeding"): inserting ``a`` after ``a``
in ``ba`` yields ``baa``, not an unbounded run of ``a``.

When two recorded sites would edit the same token index, the leftmost
site wins and the conflicting mapping is skipped with a diagnostic.
Rules and cascades are immutable after construction and application is
pure, so everything here is safe for unrestricted concurrent use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from cascade_forge.phonology import (
    BOUNDARY,
    SEPARATOR,
    Inventory,
    TokenizedWord,
)


class RuleError(ValueError):
    """Raised for structurally invalid rules."""


class RuleParseError(RuleError):
    """Raised for malformed rule JSON; carries a JSON-pointer-style location."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


# --- predicates -------------------------------------------------------------


@dataclass(frozen=True)
class Predicate:
    pass


@dataclass(frozen=True)
class PhoneSet(Predicate):
    """Matches any phone token in the set."""

    phones: frozenset[str]

    def __init__(self, phones):
        object.__setattr__(self, "phones", frozenset(phones))


@dataclass(frozen=True)
class IsNothing(Predicate):
    """Matches exactly the separator token."""


@dataclass(frozen=True)
class WordStart(Predicate):
    """Matches the boundary token in first position only."""


@dataclass(frozen=True)
class WordEnd(Predicate):
    """Matches the boundary token in last position only."""


@dataclass(frozen=True)
class FeatureReq(Predicate):
    """Matches phone tokens whose features satisfy the partial requirements.

    Needs an inventory at match time to resolve symbols to feature vectors;
    boundary and separator tokens never satisfy it.
    """

    reqs: tuple[tuple[int, int], ...]

    def __init__(self, reqs):
        items = tuple(sorted(dict(reqs).items())) if not isinstance(reqs, tuple) else tuple(sorted(reqs))
        object.__setattr__(self, "reqs", items)

    def as_dict(self) -> dict[int, int]:
        return dict(self.reqs)


@dataclass(frozen=True)
class Not(Predicate):
    inner: Predicate


# --- mapping functions ------------------------------------------------------


@dataclass(frozen=True)
class MappingFn:
    pass


@dataclass(frozen=True)
class Delete(MappingFn):
    pass


@dataclass(frozen=True)
class Substitute(MappingFn):
    """Per-phone replacement; phones absent from the map are left alone."""

    mapping: tuple[tuple[str, tuple[str, ...]], ...]

    def __init__(self, mapping):
        if isinstance(mapping, tuple):
            items = tuple(sorted(mapping))
        else:
            items = tuple(sorted((k, tuple(v)) for k, v in dict(mapping).items()))
        object.__setattr__(self, "mapping", items)

    def get(self, phone: str) -> tuple[str, ...] | None:
        for key, value in self.mapping:
            if key == phone:
                return value
        return None

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return dict(self.mapping)


@dataclass(frozen=True)
class Insert(MappingFn):
    phones: tuple[str, ...]

    def __init__(self, phones):
        object.__setattr__(self, "phones", tuple(phones))


# --- rule / cascade ---------------------------------------------------------


def _can_match_phone(pred: Predicate) -> bool:
    if isinstance(pred, (PhoneSet, FeatureReq)):
        return True
    if isinstance(pred, Not):
        # A negated predicate may match phone tokens unless it negates
        # something that matches every phone, which none of our kinds do.
        return True
    return False


@dataclass(frozen=True)
class Rule:
    """One sound law: environment predicates, change positions, mappings.

    ``name`` is free-form metadata and excluded from equality.
    """

    predicates: tuple[Predicate, ...]
    change_pos: tuple[int, ...]
    mappings: tuple[MappingFn, ...]
    name: str | None = field(default=None, compare=False)

    def __init__(self, predicates, change_pos, mappings, name=None):
        object.__setattr__(self, "predicates", tuple(predicates))
        object.__setattr__(self, "change_pos", tuple(change_pos))
        object.__setattr__(self, "mappings", tuple(mappings))
        object.__setattr__(self, "name", name)

    def validate(self, inv: Inventory | None = None) -> None:
        if not self.predicates:
            raise RuleError("rule has no predicates")
        if not self.change_pos:
            raise RuleError("rule has no change positions")
        if len(self.change_pos) != len(self.mappings):
            raise RuleError(
                f"{len(self.change_pos)} change positions but {len(self.mappings)} mappings"
            )
        if len(set(self.change_pos)) != len(self.change_pos):
            raise RuleError("duplicate change positions")
        for pos, fn in zip(self.change_pos, self.mappings):
            if pos < 0 or pos >= len(self.predicates):
                raise RuleError(f"change position {pos} outside environment of length {len(self.predicates)}")
            pred = self.predicates[pos]
            if isinstance(fn, Insert):
                if not isinstance(pred, IsNothing):
                    raise RuleError(f"insert at position {pos} requires an is-nothing predicate")
                if not fn.phones:
                    raise RuleError("insert sequence is empty")
            else:
                if not _can_match_phone(pred):
                    raise RuleError(
                        f"{type(fn).__name__.lower()} at position {pos} requires a phone-matching predicate"
                    )
            if isinstance(fn, Substitute):
                if not fn.mapping:
                    raise RuleError("substitute map is empty")
                for key, value in fn.mapping:
                    if not value:
                        raise RuleError(f"substitute target for {key!r} is empty")
            if inv is not None:
                if isinstance(fn, Insert):
                    for phone in fn.phones:
                        if phone not in inv:
                            raise RuleError(f"insert phone {phone!r} not in inventory")
                elif isinstance(fn, Substitute):
                    for key, value in fn.mapping:
                        for phone in (key, *value):
                            if phone not in inv:
                                raise RuleError(f"substitute phone {phone!r} not in inventory")
        for i, pred in enumerate(self.predicates):
            _validate_predicate(pred, i, inv)

    def environment_size(self) -> int:
        return len(self.predicates)


def _validate_predicate(pred: Predicate, position: int, inv: Inventory | None) -> None:
    if isinstance(pred, PhoneSet):
        if not pred.phones:
            raise RuleError(f"empty phone set at position {position}")
        if inv is not None:
            for symbol in pred.phones:
                if symbol not in inv:
                    raise RuleError(f"phone {symbol!r} at position {position} not in inventory")
    elif isinstance(pred, FeatureReq):
        for idx, value in pred.reqs:
            if value not in (0, 1):
                raise RuleError(f"feature requirement value {value!r} at position {position}")
            if idx < 0 or (inv is not None and idx >= inv.num_features):
                raise RuleError(f"feature index {idx} out of range at position {position}")
    elif isinstance(pred, Not):
        _validate_predicate(pred.inner, position, inv)


@dataclass(frozen=True)
class Cascade:
    """An ordered sequence of rules; order is significant, empty is identity."""

    rules: tuple[Rule, ...] = ()

    def __init__(self, rules=()):
        object.__setattr__(self, "rules", tuple(rules))

    def __len__(self) -> int:
        return len(self.rules)


# --- matching and application -----------------------------------------------


def match_predicate(
    pred: Predicate,
    token: str,
    is_first: bool,
    is_last: bool,
    inv: Inventory | None = None,
) -> bool:
    """Evaluate one predicate against one token at a known word position."""
    if isinstance(pred, PhoneSet):
        return token in pred.phones
    if isinstance(pred, IsNothing):
        return token == SEPARATOR
    if isinstance(pred, WordStart):
        return token == BOUNDARY and is_first
    if isinstance(pred, WordEnd):
        return token == BOUNDARY and is_last
    if isinstance(pred, FeatureReq):
        if token == BOUNDARY or token == SEPARATOR:
            return False
        if inv is None:
            raise RuleError("feature predicates require an inventory to match")
        return token in inv.matching_phones(pred.as_dict())
    if isinstance(pred, Not):
        return not match_predicate(pred.inner, token, is_first, is_last, inv)
    raise RuleError(f"unknown predicate {pred!r}")


def find_sites(rule: Rule, word: TokenizedWord, inv: Inventory | None = None) -> list[int]:
    """All start indices where the environment matches, scanning left to right.

    Sites are detected on the given word only; windows running past the end
    never match.  Overlapping sites are all recorded.
    """
    tokens = word.tokens
    n = len(tokens)
    last = n - 1
    preds = rule.predicates
    width = len(preds)
    sites: list[int] = []
    for start in range(n - width + 1):
        for offset, pred in enumerate(preds):
            pos = start + offset
            if not match_predicate(pred, tokens[pos], pos == 0, pos == last, inv):
                break
        else:
            sites.append(start)
    return sites


def apply_rule(
    rule: Rule,
    word: TokenizedWord,
    inv: Inventory | None = None,
    diagnostics: list[str] | None = None,
) -> TokenizedWord:
    """Apply one rule with two-stage semantics and return the canonical result.

    Stage 1 records all sites on the input; stage 2 applies every mapping at
    every recorded site against the original token indices, then the output
    is rebuilt in canonical layout.  Skipped mappings (site conflicts,
    substitutions with no entry for the matched phone, mapping kind and token
    kind disagreeing) are reported through ``diagnostics`` when given.
    """
    tokens = word.tokens
    sites = find_sites(rule, word, inv)
    if not sites:
        return word

    def note(message: str) -> None:
        if diagnostics is not None:
            diagnostics.append(message)

    edits: dict[int, tuple[str, tuple[str, ...]]] = {}
    for site in sites:
        for pos, fn in zip(rule.change_pos, rule.mappings):
            target = site + pos
            if target in edits:
                note(f"site {site}: change at token {target} conflicts with an earlier site; skipped")
                continue
            token = tokens[target]
            if isinstance(fn, Insert):
                if token != SEPARATOR:
                    note(f"site {site}: insert aimed at non-separator token {token!r}; skipped")
                    continue
                edits[target] = ("insert", fn.phones)
            elif isinstance(fn, Delete):
                if token == BOUNDARY or token == SEPARATOR:
                    note(f"site {site}: delete aimed at structural token {token!r}; skipped")
                    continue
                edits[target] = ("delete", ())
            elif isinstance(fn, Substitute):
                if token == BOUNDARY or token == SEPARATOR:
                    note(f"site {site}: substitute aimed at structural token {token!r}; skipped")
                    continue
                replacement = fn.get(token)
                if replacement is None:
                    note(f"site {site}: no substitute entry for {token!r}; left unchanged")
                    continue
                edits[target] = ("sub", replacement)
            else:
                raise RuleError(f"unknown mapping function {fn!r}")

    phones: list[str] = []
    for idx, token in enumerate(tokens):
        if token == BOUNDARY:
            continue
        edit = edits.get(idx)
        if token == SEPARATOR:
            if edit is not None:
                phones.extend(edit[1])
            continue
        if edit is None:
            phones.append(token)
        elif edit[0] == "sub":
            phones.extend(edit[1])
        # deletes contribute nothing
    return TokenizedWord.from_phones(phones)


def apply_cascade(
    cascade: Cascade,
    word: TokenizedWord,
    inv: Inventory | None = None,
    diagnostics: list[str] | None = None,
) -> tuple[TokenizedWord, list[TokenizedWord]]:
    """Fold the rules over the word in order; the trace has one entry per rule."""
    trace: list[TokenizedWord] = []
    current = word
    for rule in cascade.rules:
        current = apply_rule(rule, current, inv, diagnostics)
        trace.append(current)
    return current, trace


# --- serialization ----------------------------------------------------------

_PREDICATE_KINDS = ("phone_set", "is_nothing", "word_start", "word_end", "feature_req", "not")
_MAPPING_KINDS = ("delete", "substitute", "insert")


def predicate_to_obj(pred: Predicate) -> dict[str, Any]:
    if isinstance(pred, PhoneSet):
        return {"kind": "phone_set", "phones": sorted(pred.phones)}
    if isinstance(pred, IsNothing):
        return {"kind": "is_nothing"}
    if isinstance(pred, WordStart):
        return {"kind": "word_start"}
    if isinstance(pred, WordEnd):
        return {"kind": "word_end"}
    if isinstance(pred, FeatureReq):
        return {"kind": "feature_req", "reqs": {str(i): v for i, v in pred.reqs}}
    if isinstance(pred, Not):
        return {"kind": "not", "inner": predicate_to_obj(pred.inner)}
    raise RuleError(f"unknown predicate {pred!r}")


def mapping_to_obj(fn: MappingFn) -> dict[str, Any]:
    if isinstance(fn, Delete):
        return {"kind": "delete"}
    if isinstance(fn, Substitute):
        return {"kind": "substitute", "map": {k: list(v) for k, v in fn.mapping}}
    if isinstance(fn, Insert):
        return {"kind": "insert", "phones": list(fn.phones)}
    raise RuleError(f"unknown mapping function {fn!r}")


def rule_to_obj(rule: Rule) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "predicates": [predicate_to_obj(p) for p in rule.predicates],
        "change_pos": list(rule.change_pos),
        "mappings": [mapping_to_obj(m) for m in rule.mappings],
    }
    if rule.name is not None:
        obj["name"] = rule.name
    return obj


def serialize_rule(rule: Rule) -> str:
    """Canonical JSON text: sorted keys, sorted phone sets, compact separators."""
    return json.dumps(rule_to_obj(rule), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _expect(obj: Any, kind: type, path: str, what: str) -> Any:
    if not isinstance(obj, kind):
        raise RuleParseError(f"expected {what}, got {type(obj).__name__}", path)
    return obj


def predicate_from_obj(obj: Any, path: str = "") -> Predicate:
    _expect(obj, dict, path, "an object")
    kind = obj.get("kind")
    if kind == "phone_set":
        phones = _expect(obj.get("phones"), list, f"{path}/phones", "a list")
        if not phones:
            raise RuleParseError("empty phone set", f"{path}/phones")
        for i, symbol in enumerate(phones):
            _expect(symbol, str, f"{path}/phones/{i}", "a string")
        return PhoneSet(phones)
    if kind == "is_nothing":
        return IsNothing()
    if kind == "word_start":
        return WordStart()
    if kind == "word_end":
        return WordEnd()
    if kind == "feature_req":
        reqs_obj = _expect(obj.get("reqs"), dict, f"{path}/reqs", "an object")
        reqs: dict[int, int] = {}
        for key, value in reqs_obj.items():
            try:
                idx = int(key)
            except (TypeError, ValueError):
                raise RuleParseError(f"non-integer feature index {key!r}", f"{path}/reqs") from None
            if value not in (0, 1):
                raise RuleParseError(f"requirement value must be 0 or 1, got {value!r}", f"{path}/reqs/{key}")
            reqs[idx] = value
        return FeatureReq(reqs)
    if kind == "not":
        return Not(predicate_from_obj(obj.get("inner"), f"{path}/inner"))
    raise RuleParseError(f"unknown predicate kind {kind!r}", f"{path}/kind")


def mapping_from_obj(obj: Any, path: str = "") -> MappingFn:
    _expect(obj, dict, path, "an object")
    kind = obj.get("kind")
    if kind == "delete":
        return Delete()
    if kind == "substitute":
        map_obj = _expect(obj.get("map"), dict, f"{path}/map", "an object")
        mapping: dict[str, tuple[str, ...]] = {}
        for key, value in map_obj.items():
            seq = _expect(value, list, f"{path}/map/{key}", "a list")
            if not seq:
                raise RuleParseError("empty substitute target", f"{path}/map/{key}")
            mapping[key] = tuple(_expect(s, str, f"{path}/map/{key}", "a string") for s in seq)
        return Substitute(mapping)
    if kind == "insert":
        phones = _expect(obj.get("phones"), list, f"{path}/phones", "a list")
        if not phones:
            raise RuleParseError("empty insert sequence", f"{path}/phones")
        return Insert(_expect(s, str, f"{path}/phones", "a string") for s in phones)
    raise RuleParseError(f"unknown mapping kind {kind!r}", f"{path}/kind")


def rule_from_obj(obj: Any, path: str = "", inv: Inventory | None = None) -> Rule:
    _expect(obj, dict, path, "an object")
    predicates = [
        predicate_from_obj(p, f"{path}/predicates/{i}")
        for i, p in enumerate(_expect(obj.get("predicates"), list, f"{path}/predicates", "a list"))
    ]
    change_pos = _expect(obj.get("change_pos"), list, f"{path}/change_pos", "a list")
    for i, pos in enumerate(change_pos):
        if not isinstance(pos, int) or isinstance(pos, bool):
            raise RuleParseError(f"expected an integer, got {pos!r}", f"{path}/change_pos/{i}")
    mappings = [
        mapping_from_obj(m, f"{path}/mappings/{i}")
        for i, m in enumerate(_expect(obj.get("mappings"), list, f"{path}/mappings", "a list"))
    ]
    name = obj.get("name")
    if name is not None:
        _expect(name, str, f"{path}/name", "a string")
    rule = Rule(predicates, change_pos, mappings, name)
    try:
        rule.validate(inv)
    except RuleError as exc:
        raise RuleParseError(str(exc), path) from None
    return rule


def parse_rule(text: str, inv: Inventory | None = None) -> Rule:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleParseError(f"invalid JSON: {exc}") from None
    return rule_from_obj(obj, "", inv)


def cascade_to_obj(cascade: Cascade) -> list[dict[str, Any]]:
    return [rule_to_obj(r) for r in cascade.rules]


def serialize_cascade(cascade: Cascade) -> str:
    return json.dumps(cascade_to_obj(cascade), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def cascade_from_obj(obj: Any, inv: Inventory | None = None) -> Cascade:
    _expect(obj, list, "", "a list")
    return Cascade(rule_from_obj(r, f"/{i}", inv) for i, r in enumerate(obj))


def parse_cascade(text: str, inv: Inventory | None = None) -> Cascade:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleParseError(f"invalid JSON: {exc}") from None
    return cascade_from_obj(obj, inv)
