from hypothesis import given, strategies as st

from editkit.text import (
    SENTINEL,
    detokenize,
    sentence_ids,
    sentence_starts,
    split_sentences,
    swap_position,
    tokenize,
)

FUSION_SOURCE = "Dylan won Nobel prize. Dylan is an American musician."

# (input, expected tokens), covering every splitting rule.
SPLIT_CASES = [
    ("Alistair Crane 's", ["Alistair", "Crane", "'s"]),
    ("Crane's house", ["Crane", "'s", "house"]),
    ("It works.", ["It", "works", "."]),
    ("Wait, what?", ["Wait", ",", "what", "?"]),
    ("Stop!", ["Stop", "!"]),
    ("one; two: three", ["one", ";", "two", ":", "three"]),
    ('"Quoted"', ['"', "Quoted", '"']),
    ("'single'", ["'", "single", "'"]),
    ("(aside)", ["(", "aside", ")"]),
    ("(aside).", ["(", "aside", ")", "."]),
    ("Anna's.", ["Anna", "'s", "."]),
    ("'s", ["'s"]),
    ("e.g. this", ["e.g", ".", "this"]),
    ("3.5 m", ["3.5", "m"]),
    ("  spaced   out  ", ["spaced", "out"]),
    ("done .", ["done", "."]),
    ("a <::::> b", ["a", "<::::>", "b"]),
    ("x...", ["x", ".", ".", "."]),
    ("well-known", ["well-known"]),
    ("UN's role, too.", ["UN", "'s", "role", ",", "too", "."]),
]

CORPUS_50 = [
    "Dylan won Nobel prize.",
    "Dylan is an American musician.",
    "Turing was born in 1912 and died in 1954.",
    "Crane's house is large.",
    "He said, \"yes\".",
    "The rain (which was heavy) stopped.",
    "Is it over?",
    "Stop!",
    "Paris, the capital, is busy.",
    "She left; he stayed.",
    "Note: read this.",
    "The 'quote' here.",
    "It cost 3.5 dollars.",
    "A, B, and C.",
    "Her cat's toy.",
    "Maria studied law <::::> She became a judge.",
    "They met in Lima.",
    "Oslo is cold in winter.",
    "The museum opened in 1990.",
    "Ines studied music and became a composer.",
    "Why not?",
    "Well, maybe.",
    "The (small) dog barked.",
    "We won!",
    "Karl bakes bread.",
    "The airport was closed because of fog.",
    "Seoul, a modern city, has many parks.",
    "Kim's team won.",
    "First; second.",
    "One: two.",
    "\"Hello,\" she said.",
    "It is 'fine'.",
    "The end.",
    "",
    "word",
    "Mr Smith arrived.",
    "They sold 40 cars.",
    "Lima is the capital of Peru.",
    "The river flows north.",
    "His book, however, sold well.",
    "Rome was not built in a day.",
    "Ask (nicely).",
    "Is Anna's car red?",
    "Yes, it is.",
    "Tom plays chess; Ana plays go.",
    "The show ended.",
    "A B C.",
    "x",
    "The team's coach resigned.",
    "All done.",
]


def test_fusion_source_tokens():
    assert tokenize("Dylan won Nobel prize.") == ("Dylan", "won", "Nobel", "prize", ".")


def test_empty():
    assert tokenize("") == ()
    assert detokenize([]) == ""


def test_split_rules():
    for text, expected in SPLIT_CASES:
        assert list(tokenize(text)) == expected, text


def test_detokenize_attaches_punctuation():
    assert detokenize(["Dylan", "won", "."]) == "Dylan won."
    assert detokenize(["Crane", "'s", "house", ","]) == "Crane's house,"
    assert detokenize(["(", "aside", ")"]) == "(aside)"


def test_round_trip_corpus():
    assert len(CORPUS_50) == 50
    for text in CORPUS_50:
        toks = tokenize(text)
        assert tokenize(detokenize(toks)) == toks, text


token = st.one_of(
    st.text(alphabet="abcXYZ019-", min_size=1, max_size=6),
    st.sampled_from([".", ",", "!", "?", ";", ":", "'s", "(", ")", '"', "'"]),
)


@given(st.lists(token, max_size=12))
def test_round_trip_property(tokens):
    toks = tokenize(" ".join(tokens))
    assert tokenize(detokenize(toks)) == toks


@given(st.text(max_size=40))
def test_tokens_have_no_whitespace(text):
    assert all(tok and not any(c.isspace() for c in tok) for tok in tokenize(text))


def test_split_sentences():
    assert split_sentences(["A", ".", "B", "."]) == [("A", "."), ("B", ".")]
    assert split_sentences(["A", "B"]) == [("A", "B")]
    assert [len(s) for s in split_sentences(tokenize(FUSION_SOURCE))] == [5, 6]


def test_sentence_starts_and_ids():
    toks = tokenize(FUSION_SOURCE)
    starts = sentence_starts(toks)
    assert [i for i, s in enumerate(starts) if s] == [0, 5]
    assert sentence_ids(toks) == [0] * 5 + [1] * 6


def test_swap_position():
    assert swap_position(tokenize(FUSION_SOURCE)) == 4
    assert swap_position(tokenize(FUSION_SOURCE) + (SENTINEL,)) == 4
    assert swap_position(tokenize("One sentence only.")) is None
    assert swap_position(tokenize("A. B. C.")) is None
