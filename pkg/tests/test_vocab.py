import itertools
import random

import pytest

from editkit import corpus as C
from editkit.align import PhraseSet
from editkit.vocab import (
    InstanceTooLarge,
    PhraseVocabulary,
    VocabFormatError,
    coverage,
    phrase_frequencies,
    read_vocab,
    select_exact,
    select_frequency,
    select_greedy,
    write_vocab,
)


def sets(*groups):
    return [PhraseSet(frozenset((p,) for p in g)) for g in groups]


PAREN = sets(*([["(", ")"]] * 10 + [[","]]))


def covered(vocab, phrase_sets):
    return coverage(vocab, phrase_sets).covered_examples


def random_instance(rng):
    pool = [f"p{i}" for i in range(rng.randint(1, 10))]
    groups = [rng.sample(pool, rng.randint(0, min(3, len(pool)))) for _ in range(rng.randint(1, 12))]
    return sets(*groups), rng.randint(0, len(pool))


def enumerate_best(phrase_sets, budget):
    pool = sorted(phrase_frequencies(phrase_sets))
    best = 0
    for k in range(min(budget, len(pool)) + 1):
        for combo in itertools.combinations(pool, k):
            best = max(best, covered(combo, phrase_sets))
    return best


def test_zero_budget():
    assert len(select_frequency(sets(["a"]), 0)) == 0


def test_frequency_hand_count():
    ps = sets(["a"], ["a"], ["a", "b"], ["b", "c"])
    assert phrase_frequencies(ps) == {("a",): 3, ("b",): 2, ("c",): 1}
    assert set(select_frequency(ps, 2)) == {("a",), ("b",)}


def test_comma_ranks_first_on_fusion_fixture():
    vocab = select_frequency(C.phrase_sets(C.load_bundled()), 500)
    assert vocab.phrases[0] == (",",)


def test_greedy_avoids_uncoupled_paren():
    assert set(select_greedy(PAREN, 1)) == {(",",)}
    assert set(select_frequency(PAREN, 1)) <= {("(",), (")",)}


def test_greedy_unconstrained_covers_everything():
    ps = sets(["a"], ["b", "c"], [])
    assert coverage(select_greedy(ps, 10), ps).coverage == 1.0


def test_exact_forced_and_paren():
    ps = sets(["p"])
    vocab = select_exact(ps, 1)
    assert set(vocab) == {("p",)} and coverage(vocab, ps).coverage == 1.0
    vocab = select_exact(PAREN, 2)
    assert set(vocab) == {("(",), (")",)}
    assert coverage(vocab, PAREN).coverage == pytest.approx(10 / 11)


def test_solver_ordering_on_random_instances():
    rng = random.Random(3)
    for _ in range(100):
        ps, budget = random_instance(rng)
        exact = covered(select_exact(ps, budget), ps)
        assert exact >= covered(select_greedy(ps, budget), ps) >= 0
        assert exact == enumerate_best(ps, budget)


def test_exact_refuses_large_instances():
    ps = sets([f"p{i}" for i in range(25)])
    with pytest.raises(InstanceTooLarge):
        select_exact(ps, 3)


def test_coverage_conventions():
    assert coverage(PhraseVocabulary(), []).coverage == 1.0
    assert coverage([("a",)], sets(["a"], ["a", "b"])).coverage == 0.5
    unattachable = [PhraseSet(frozenset({("a",)}), attachable=False)]
    assert coverage([("a",)], unattachable).coverage == 0.0


def test_vocabulary_invariants():
    vocab = PhraseVocabulary(((",",), ("and", "then")))
    assert vocab.max_phrase_len == 2
    assert PhraseVocabulary().max_phrase_len == 0
    assert ("and", "then") in vocab
    with pytest.raises(ValueError):
        PhraseVocabulary(((",",), (",",)))
    with pytest.raises(ValueError):
        PhraseVocabulary(((),))


def test_file_round_trip(tmp_path):
    vocab = PhraseVocabulary(((",",), ("and", "then"), ("'s",)), "c1")
    path = tmp_path / "v.txt"
    write_vocab(vocab, path)
    back = read_vocab(path)
    assert back.phrases == vocab.phrases
    assert back.fingerprint() == vocab.fingerprint()


def test_file_errors(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("not a vocab\n,\n")
    with pytest.raises(VocabFormatError):
        read_vocab(path)
    path.write_text("editkit-vocab v1 3\n,\n")
    with pytest.raises(VocabFormatError):
        read_vocab(path)


def test_greedy_can_trail_frequency():
    # Greedy takes the singleton first, then has budget for only one of the
    # coupled pair; frequency takes the pair outright.
    ps = sets(["a"], ["b", "c"], ["b", "c"])
    assert covered(select_greedy(ps, 2), ps) == 1
    assert covered(select_frequency(ps, 2), ps) == 2
    assert covered(select_exact(ps, 2), ps) == 2
