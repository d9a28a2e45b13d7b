import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narranet.corpus import (
    CharacterRoster,
    RosterEntry,
    SegmentationConfig,
    detect_appearances,
    parse_narrative,
    tokenize,
)
from narranet.errors import AmbiguousAlias, ConfigError, NoChaptersFound, NonMonotoneHeading
from narranet.resources import lesmiserables_dir
from synthetic import make_novel

BUNDLED_MARKERS = SegmentationConfig.load(lesmiserables_dir() / "segmentation.yaml")


@pytest.mark.parametrize("text, expected", [
    ("Jean Valjean, the convict!", ["jean", "valjean", "the", "convict"]),
    ("", []),
    ("l'homme 1832", ["l", "homme"]),
    ("  --  ", []),
    ("Thénardier's INN", ["thénardier", "s", "inn"]),
])
def test_tokenize_examples(text, expected):
    assert tokenize(text) == expected


@given(st.text())
def test_tokenize_idempotent(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


@given(st.text())
def test_tokens_have_no_digits_or_punctuation(text):
    for t in tokenize(text):
        assert t and t.isalpha() and t == t.lower()


def test_single_chapter():
    corpus = parse_narrative("CHAPTER I\nabc")
    assert corpus.n_chapters == 1
    assert "abc" in corpus[1].raw_text
    assert corpus[1].tokens == ("chapter", "i", "abc")


def test_three_chapters_in_file_order():
    raw = "CHAPTER I\nfirst body\nCHAPTER II\nsecond body\nCHAPTER III\nthird body\n"
    corpus = parse_narrative(raw)
    assert [c.ref.ordinal for c in corpus] == [1, 2, 3]
    assert [c.ref.chapter_index for c in corpus] == [1, 2, 3]
    assert "first" in corpus[1].raw_text and "second" not in corpus[1].raw_text
    assert "third" in corpus[3].raw_text
    assert corpus[2].title == "CHAPTER II"


def test_no_chapters_found():
    with pytest.raises(NoChaptersFound):
        parse_narrative("just prose, no headings")
    with pytest.raises(NoChaptersFound):
        parse_narrative("")


def test_book_before_volume_is_rejected():
    markers = SegmentationConfig(book_pattern=r"^BOOK \w+$", volume_pattern=r"^VOLUME \w+$")
    with pytest.raises(NonMonotoneHeading):
        parse_narrative("BOOK FIRST\nCHAPTER I\nx\nVOLUME I\n", markers)


def test_hierarchy_and_trim_on_synthetic_novel():
    text, _, structure = make_novel(seed=3, n_volumes=3, books_per_volume=2, chapters_per_book=3)
    corpus = parse_narrative(text, BUNDLED_MARKERS)
    assert corpus.n_chapters == len(structure) == 18
    assert corpus.n_books == 6
    assert corpus.n_volumes == 3
    got = [(c.ref.volume_index, c.ref.book_index, c.ref.chapter_index) for c in corpus]
    assert got == structure
    # ordinal order equals lexicographic hierarchy order
    assert got == sorted(got)
    assert [c.ref.ordinal for c in corpus] == list(range(1, 19))
    # licence text after the end marker is gone
    assert all("licence" not in c.tokens for c in corpus)


def test_every_character_accounted_for():
    text, _, _ = make_novel(seed=4)
    corpus = parse_narrative(text, BUNDLED_MARKERS)
    start = [m.start() for m in re.finditer(BUNDLED_MARKERS.start_marker, text, re.M)][-1]
    end = re.search(BUNDLED_MARKERS.end_marker, text, re.M).start()
    pieces = [c.raw_text for c in corpus] + list(corpus.interstitial)
    assert sum(len(p) for p in pieces) == end - start
    joined = "".join(sorted(pieces))
    assert sorted(joined) == sorted(text[start:end])


def test_start_occurrence_out_of_range():
    markers = SegmentationConfig(start_marker="^CHAPTER", start_occurrence=5)
    with pytest.raises(ConfigError):
        parse_narrative("CHAPTER I\nx", markers)


def test_regroup_books():
    text, _, _ = make_novel(seed=5, n_volumes=2, books_per_volume=2, chapters_per_book=3)
    corpus = parse_narrative(text, BUNDLED_MARKERS)
    books = corpus.regroup("book")
    assert books.n_chapters == 4
    assert sum(b.token_count for b in books) == sum(c.token_count for c in corpus)
    assert corpus.regroup("volume").n_chapters == 2


def _fixture_corpus():
    raw = ("CHAPTER I\nAnna walked in.\n"
           "CHAPTER II\nBo was alone. Annabel is not Anna's cousin... wait.\n"
           "CHAPTER III\nThen ANNA came back.\n")
    return parse_narrative(raw)


def brute_force_appearances(corpus, aliases):
    """Token-sequence scan, independent of the regex path."""
    from narranet.corpus import fold

    out = {}
    for name, alist in aliases.items():
        hits = []
        for ch in corpus:
            toks = tokenize(fold(ch.raw_text))
            for alias in alist:
                a = tokenize(fold(alias))
                if any(toks[i:i + len(a)] == a for i in range(len(toks) - len(a) + 1)):
                    hits.append(ch.ref.ordinal)
                    break
        out[name] = hits
    return out


def test_anna_bo_fixture_matches_brute_force():
    corpus = parse_narrative(
        "CHAPTER I\nAnna walked in.\nCHAPTER II\nBo was alone.\nCHAPTER III\nThen ANNA came back.\n"
    )
    aliases = {"Anna": ["Anna"], "Bo": ["Bo"]}
    tl = detect_appearances(corpus, CharacterRoster.from_mapping(aliases))
    assert {k: list(v.chapters) for k, v in tl.items()} == {"Anna": [1, 3], "Bo": [2]}
    assert brute_force_appearances(corpus, aliases) == {"Anna": [1, 3], "Bo": [2]}


def test_word_boundaries_respected():
    corpus = parse_narrative("CHAPTER I\nMariusz and Annabel.\nCHAPTER II\nMarius.\n")
    tl = detect_appearances(corpus, CharacterRoster.from_mapping({"Marius": ["Marius"], "Anna": ["Anna"]}))
    assert tl["Marius"].chapters == (2,)
    assert tl["Anna"].chapters == ()


def test_unmatched_character_gets_empty_timeline():
    tl = detect_appearances(_fixture_corpus(), CharacterRoster.from_mapping({"X": ["zzz"]}))
    assert tl["X"].chapters == () and tl["X"].appearance == 0


def test_accents_and_phrases():
    corpus = parse_narrative(
        "CHAPTER I\nMadame\nThénardier shouted.\nCHAPTER II\nthe thenardier inn\nCHAPTER III\nM. Madeleine.\n"
    )
    roster = CharacterRoster((
        RosterEntry("MmeT", ("Madame Thenardier",), "phrase"),
        RosterEntry("T", ("Thénardier",), "word"),
        RosterEntry("V", ("M. Madeleine",), "word"),
    ))
    tl = detect_appearances(corpus, roster)
    assert tl["MmeT"].chapters == (1,)
    assert tl["T"].chapters == (1, 2)
    assert tl["V"].chapters == (3,)


def test_case_sensitive_alias():
    corpus = parse_narrative("CHAPTER I\nmy favourite dish\nCHAPTER II\nFavourite laughed\n")
    roster = CharacterRoster((RosterEntry("Favourite", ("Favourite",), "word", True),))
    assert detect_appearances(corpus, roster)["Favourite"].chapters == (2,)


def test_ambiguous_alias_rejected():
    with pytest.raises(AmbiguousAlias):
        CharacterRoster.from_mapping({"A": ["Jean Valjean"], "B": ["jean  VALJEAN"]})


@pytest.mark.parametrize("records", [
    [{"name": "A", "aliases": ["x"]}, {"name": "A", "aliases": ["y"]}],
    [{"name": "A", "aliases": ["  "]}],
    [{"name": "A", "aliases": ["x"], "match": "fuzzy"}],
])
def test_bad_rosters(records):
    with pytest.raises(ConfigError):
        CharacterRoster.from_records(records)


def test_synthetic_timelines_recovered():
    text, expected, _ = make_novel(seed=7)
    corpus = parse_narrative(text, BUNDLED_MARKERS)
    roster = CharacterRoster.from_mapping({n: [n] for n in expected})
    tl = detect_appearances(corpus, roster)
    assert {k: list(v.chapters) for k, v in tl.items()} == expected


def test_appending_a_chapter_never_lowers_appearance():
    raw = "CHAPTER I\nAnna.\nCHAPTER II\nBo.\n"
    roster = CharacterRoster.from_mapping({"Anna": ["Anna"], "Bo": ["Bo"]})
    before = detect_appearances(parse_narrative(raw), roster)
    after = detect_appearances(parse_narrative(raw + "CHAPTER III\nAnna and Bo.\n"), roster)
    for name in before:
        assert after[name].appearance >= before[name].appearance


def test_detection_deterministic():
    text, expected, _ = make_novel(seed=8)
    corpus = parse_narrative(text, BUNDLED_MARKERS)
    roster = CharacterRoster.from_mapping({n: [n] for n in expected})
    assert detect_appearances(corpus, roster) == detect_appearances(corpus, roster)


def test_bundled_roster_loads():
    roster = CharacterRoster.load(lesmiserables_dir() / "roster.yaml")
    assert len(roster) == 63
    assert {"Valjean", "Marius", "Cosette", "Javert", "Babet", "Geborand"} <= set(roster.names)


@settings(max_examples=30)
@given(st.lists(st.sampled_from(["Anna", "Bo", "filler", "annabel", "x.", "ANNA"]), max_size=30))
def test_detection_matches_token_scan(words):
    corpus = parse_narrative("CHAPTER I\n" + " ".join(words) + "\n")
    aliases = {"Anna": ["Anna"], "Bo": ["Bo"]}
    tl = detect_appearances(corpus, CharacterRoster.from_mapping(aliases))
    assert {k: list(v.chapters) for k, v in tl.items()} == brute_force_appearances(corpus, aliases)
