#!/usr/bin/env python3
"""Build the bundled default inventory TSV.

Emits ~120 IPA segments with 24 ternary articulatory features.  The exact
feature theory is not load-bearing for the toolkit; what matters is that
every vector is unique, the dimensionality is fixed, and common segments
are covered.  Run from the repo root:

    python scripts/build_default_inventory.py > src/cascade_forge/data/default_inventory.tsv
"""

FEATURES = [
    "syllabic", "sonorant", "consonantal", "continuant", "nasal", "voice",
    "labial", "round", "coronal", "anterior", "distributed", "dorsal",
    "high", "low", "back", "tense", "strident", "lateral", "delayed_release",
    "spread_glottis", "constricted_glottis", "long", "stress", "click",
]
IDX = {name: i for i, name in enumerate(FEATURES)}

PLACES = {
    "bilabial": {"labial": 1},
    "labiodental": {"labial": 1, "strident": 1},
    "alveolar": {"coronal": 1, "anterior": 1, "distributed": 0},
    "dental": {"coronal": 1, "anterior": 1, "distributed": 1},
    "postalveolar": {"coronal": 1, "anterior": 0, "distributed": 1},
    "retroflex": {"coronal": 1, "anterior": 0, "distributed": 0},
    "alveolopalatal": {"coronal": 1, "anterior": 0, "distributed": 1, "dorsal": 1, "high": 1},
    "palatal": {"dorsal": 1, "high": 1},
    "velar": {"dorsal": 1, "high": 1, "back": 1},
    "uvular": {"dorsal": 1, "back": 1},
    "pharyngeal": {"dorsal": 1, "low": 1, "back": 1},
    "glottal": {"consonantal": 0},
}

MANNERS = {
    "stop": {},
    "nasal": {"sonorant": 1, "nasal": 1, "voice": 1},
    "fricative": {"continuant": 1},
    "affricate": {"delayed_release": 1, "strident": 1},
    "approximant": {"sonorant": 1, "continuant": 1, "voice": 1},
    "trill": {"sonorant": 1, "continuant": 1, "voice": 1, "tense": 1},
    "tap": {"sonorant": 1, "voice": 1},
    "glide": {"consonantal": 0, "sonorant": 1, "continuant": 1, "voice": 1},
}

# symbol, place, manner, extra feature overrides
CONSONANTS = [
    ("p", "bilabial", "stop", {}),
    ("b", "bilabial", "stop", {"voice": 1}),
    ("t", "alveolar", "stop", {}),
    ("d", "alveolar", "stop", {"voice": 1}),
    ("ʈ", "retroflex", "stop", {}),
    ("ɖ", "retroflex", "stop", {"voice": 1}),
    ("c", "palatal", "stop", {}),
    ("ɟ", "palatal", "stop", {"voice": 1}),
    ("k", "velar", "stop", {}),
    ("ɡ", "velar", "stop", {"voice": 1}),
    ("q", "uvular", "stop", {}),
    ("ɢ", "uvular", "stop", {"voice": 1}),
    ("ʔ", "glottal", "stop", {"constricted_glottis": 1}),
    ("pʰ", "bilabial", "stop", {"spread_glottis": 1}),
    ("tʰ", "alveolar", "stop", {"spread_glottis": 1}),
    ("kʰ", "velar", "stop", {"spread_glottis": 1}),
    ("pʼ", "bilabial", "stop", {"constricted_glottis": 1}),
    ("tʼ", "alveolar", "stop", {"constricted_glottis": 1}),
    ("kʼ", "velar", "stop", {"constricted_glottis": 1}),
    ("bʱ", "bilabial", "stop", {"voice": 1, "spread_glottis": 1}),
    ("dʱ", "alveolar", "stop", {"voice": 1, "spread_glottis": 1}),
    ("ɡʱ", "velar", "stop", {"voice": 1, "spread_glottis": 1}),
    ("pʷ", "bilabial", "stop", {"round": 1}),
    ("bʷ", "bilabial", "stop", {"voice": 1, "round": 1}),
    ("kʷ", "velar", "stop", {"labial": 1, "round": 1}),
    ("ɡʷ", "velar", "stop", {"voice": 1, "labial": 1, "round": 1}),
    ("m", "bilabial", "nasal", {}),
    ("n", "alveolar", "nasal", {}),
    ("ɳ", "retroflex", "nasal", {}),
    ("ɲ", "palatal", "nasal", {}),
    ("ŋ", "velar", "nasal", {}),
    ("ŋʷ", "velar", "nasal", {"labial": 1, "round": 1}),
    ("ɴ", "uvular", "nasal", {}),
    ("ɸ", "bilabial", "fricative", {}),
    ("β", "bilabial", "fricative", {"voice": 1}),
    ("f", "labiodental", "fricative", {}),
    ("v", "labiodental", "fricative", {"voice": 1}),
    ("θ", "dental", "fricative", {}),
    ("ð", "dental", "fricative", {"voice": 1}),
    ("s", "alveolar", "fricative", {"strident": 1}),
    ("z", "alveolar", "fricative", {"strident": 1, "voice": 1}),
    ("ʃ", "postalveolar", "fricative", {"strident": 1}),
    ("ʒ", "postalveolar", "fricative", {"strident": 1, "voice": 1}),
    ("ʂ", "retroflex", "fricative", {"strident": 1}),
    ("ʐ", "retroflex", "fricative", {"strident": 1, "voice": 1}),
    ("ɕ", "alveolopalatal", "fricative", {"strident": 1}),
    ("ʑ", "alveolopalatal", "fricative", {"strident": 1, "voice": 1}),
    ("ç", "palatal", "fricative", {}),
    ("ʝ", "palatal", "fricative", {"voice": 1}),
    ("x", "velar", "fricative", {}),
    ("ɣ", "velar", "fricative", {"voice": 1}),
    ("χ", "uvular", "fricative", {}),
    ("ʁ", "uvular", "fricative", {"voice": 1}),
    ("ħ", "pharyngeal", "fricative", {}),
    ("ʕ", "pharyngeal", "fricative", {"voice": 1}),
    ("h", "glottal", "fricative", {"spread_glottis": 1}),
    ("ɦ", "glottal", "fricative", {"voice": 1, "spread_glottis": 1}),
    ("ɬ", "alveolar", "fricative", {"lateral": 1}),
    ("ɮ", "alveolar", "fricative", {"lateral": 1, "voice": 1}),
    ("ts", "alveolar", "affricate", {}),
    ("dz", "alveolar", "affricate", {"voice": 1}),
    ("tsʰ", "alveolar", "affricate", {"spread_glottis": 1}),
    ("tʃ", "postalveolar", "affricate", {}),
    ("dʒ", "postalveolar", "affricate", {"voice": 1}),
    ("tʃʰ", "postalveolar", "affricate", {"spread_glottis": 1}),
    ("tɕ", "alveolopalatal", "affricate", {}),
    ("dʑ", "alveolopalatal", "affricate", {"voice": 1}),
    ("ʈʂ", "retroflex", "affricate", {}),
    ("ɖʐ", "retroflex", "affricate", {"voice": 1}),
    ("ʋ", "labiodental", "approximant", {}),
    ("ɹ", "alveolar", "approximant", {}),
    ("ɻ", "retroflex", "approximant", {}),
    ("l", "alveolar", "approximant", {"lateral": 1}),
    ("ɭ", "retroflex", "approximant", {"lateral": 1}),
    ("ʎ", "palatal", "approximant", {"lateral": 1}),
    ("ʟ", "velar", "approximant", {"lateral": 1}),
    ("ʙ", "bilabial", "trill", {}),
    ("r", "alveolar", "trill", {}),
    ("ʀ", "uvular", "trill", {}),
    ("ɾ", "alveolar", "tap", {}),
    ("ɽ", "retroflex", "tap", {}),
    ("j", "palatal", "glide", {}),
    ("ɰ", "velar", "glide", {}),
    ("w", "velar", "glide", {"labial": 1, "round": 1}),
    ("ʍ", "velar", "glide", {"labial": 1, "round": 1, "voice": 0, "spread_glottis": 1}),
]

# symbol, high, low, back, round, tense, extra overrides
VOWELS = [
    ("i", 1, 0, 0, 0, 1, {}),
    ("y", 1, 0, 0, 1, 1, {}),
    ("ɨ", 1, 0, 1, 0, 0, {}),
    ("ɯ", 1, 0, 1, 0, 1, {}),
    ("u", 1, 0, 1, 1, 1, {}),
    ("ɪ", 1, 0, 0, 0, 0, {}),
    ("ʏ", 1, 0, 0, 1, 0, {}),
    ("ʊ", 1, 0, 1, 1, 0, {}),
    ("e", 0, 0, 0, 0, 1, {}),
    ("ø", 0, 0, 0, 1, 1, {}),
    ("o", 0, 0, 1, 1, 1, {}),
    ("ɛ", 0, 0, 0, 0, 0, {}),
    ("œ", 0, 0, 0, 1, 0, {}),
    ("ʌ", 0, 0, 1, 0, 0, {}),
    ("ɔ", 0, 0, 1, 1, 0, {}),
    ("ə", 0, 0, 1, 0, 1, {}),
    ("æ", 0, 1, 0, 0, 1, {}),
    ("a", 0, 1, 0, 0, 0, {}),
    ("ɶ", 0, 1, 0, 1, 0, {}),
    ("ɑ", 0, 1, 1, 0, 0, {}),
    ("ɐ", 0, 1, 1, 0, 1, {}),
    ("ɒ", 0, 1, 1, 1, 0, {}),
    ("iː", 1, 0, 0, 0, 1, {"long": 1}),
    ("eː", 0, 0, 0, 0, 1, {"long": 1}),
    ("aː", 0, 1, 0, 0, 0, {"long": 1}),
    ("oː", 0, 0, 1, 1, 1, {"long": 1}),
    ("uː", 1, 0, 1, 1, 1, {"long": 1}),
    ("ĩ", 1, 0, 0, 0, 1, {"nasal": 1}),
    ("ẽ", 0, 0, 0, 0, 1, {"nasal": 1}),
    ("ã", 0, 1, 0, 0, 0, {"nasal": 1}),
    ("õ", 0, 0, 1, 1, 1, {"nasal": 1}),
    ("ũ", 1, 0, 1, 1, 1, {"nasal": 1}),
]


def consonant_vector(place: str, manner: str, extra: dict) -> list[int]:
    vec = [0] * len(FEATURES)
    vec[IDX["consonantal"]] = 1
    vec[IDX["anterior"]] = -1
    vec[IDX["distributed"]] = -1
    for src in (PLACES[place], MANNERS[manner], extra):
        for name, value in src.items():
            vec[IDX[name]] = value
    return vec


def vowel_vector(high: int, low: int, back: int, round_: int, tense: int, extra: dict) -> list[int]:
    vec = [0] * len(FEATURES)
    vec[IDX["syllabic"]] = 1
    vec[IDX["sonorant"]] = 1
    vec[IDX["continuant"]] = 1
    vec[IDX["voice"]] = 1
    vec[IDX["dorsal"]] = 1
    vec[IDX["anterior"]] = -1
    vec[IDX["distributed"]] = -1
    vec[IDX["high"]] = high
    vec[IDX["low"]] = low
    vec[IDX["back"]] = back
    vec[IDX["round"]] = round_
    vec[IDX["tense"]] = tense
    for name, value in extra.items():
        vec[IDX[name]] = value
    return vec


def main() -> None:
    rows: list[tuple[str, list[int]]] = []
    for symbol, place, manner, extra in CONSONANTS:
        rows.append((symbol, consonant_vector(place, manner, extra)))
    for symbol, high, low, back, round_, tense, extra in VOWELS:
        rows.append((symbol, vowel_vector(high, low, back, round_, tense, extra)))

    symbols = [s for s, _ in rows]
    assert len(symbols) == len(set(symbols)), "duplicate symbol"
    vectors = {}
    for symbol, vec in rows:
        key = tuple(vec)
        assert key not in vectors, f"{symbol} duplicates feature vector of {vectors[key]}"
        vectors[key] = symbol

    print(f"# default inventory: {len(rows)} segments, {len(FEATURES)} features")
    print("!feature " + ",".join(FEATURES))
    for symbol, vec in rows:
        print(f"{symbol}\t{','.join(str(v) for v in vec)}")


if __name__ == "__main__":
    main()
