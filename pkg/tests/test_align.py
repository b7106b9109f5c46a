import random

from hypothesis import given, strategies as st

from conftest import brute_force_lcs_len
from editkit.align import extract_phrase_set, lcs, unaligned_runs
from editkit.text import tokenize

seqs = st.lists(st.sampled_from("abcd"), max_size=8)


def test_identical():
    assert lcs(["a", "b"], ["a", "b"]).lcs_pairs == ((0, 0), (1, 1))


def test_empty_side():
    assert lcs([], ["x"]).lcs_pairs == ()
    assert lcs(["x"], []).lcs_pairs == ()


def test_matches_brute_force_on_200_pairs():
    rng = random.Random(7)
    for _ in range(200):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        assert len(lcs(a, b)) == brute_force_lcs_len(a, b), (a, b)


@given(seqs, seqs)
def test_pairs_are_a_valid_common_subsequence(a, b):
    pairs = lcs(a, b).lcs_pairs
    assert all(a[i] == b[j] for i, j in pairs)
    assert all(i1 < i2 and j1 < j2 for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]))


def test_phrase_set_insertion():
    ps = extract_phrase_set(["he", "went", "home"], ["he", "quickly", "went", "home"])
    assert ps.phrases == {("quickly",)}
    assert ps.attachable


def test_phrase_set_identity_is_empty():
    assert extract_phrase_set(["a", "b"], ["a", "b"]).phrases == frozenset()


def test_phrase_set_reordered_fusion():
    source = tokenize("Dylan is an American musician. Dylan won Nobel prize.")
    target = tokenize("Dylan, an American musician, won Nobel prize.")
    assert extract_phrase_set(source, target).phrases == {(",",)}


def test_trailing_insertion_needs_sentinel():
    ps = extract_phrase_set(["a", "b"], ["a", "b", "c"])
    assert ps.phrases == {("c",)} and not ps.attachable
    ps = extract_phrase_set(["a", "b"], ["a", "b", "c"], sentinel=True)
    assert ps.attachable


@given(seqs, seqs)
def test_phrases_non_empty_and_cover_the_gaps(a, b):
    ps = extract_phrase_set(a, b)
    assert all(len(p) > 0 for p in ps.phrases)
    align = lcs(a, b)
    gap_tokens = sum(j2 - j1 for j1, j2 in unaligned_runs(align))
    assert gap_tokens == len(b) - len(align)
