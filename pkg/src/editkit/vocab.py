"""Phrase-vocabulary selection.

Picking at most ``budget`` phrases so that as many phrase sets as possible
are fully contained in the vocabulary is NP-hard. Two heuristics are provided
(plain frequency ranking, and greedy incremental coverage) together with an
exhaustive solver that only serves as an oracle on tiny instances.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from editkit.align import Phrase, PhraseSet
from editkit.files import atomic_write_text

DEFAULT_BUDGET = 500
EXACT_MAX_PHRASES = 20
VOCAB_HEADER = "editkit-vocab v1"


class InstanceTooLarge(ValueError):
    pass


class VocabFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PhraseVocabulary:
    phrases: tuple[Phrase, ...] = ()
    source_corpus_id: str = ""

    def __post_init__(self):
        if any(len(p) == 0 for p in self.phrases):
            raise ValueError("empty phrase in vocabulary")
        if len(set(self.phrases)) != len(self.phrases):
            raise ValueError("duplicate phrase in vocabulary")

    @property
    def max_phrase_len(self) -> int:
        return max((len(p) for p in self.phrases), default=0)

    def __len__(self) -> int:
        return len(self.phrases)

    def __contains__(self, phrase) -> bool:
        return tuple(phrase) in self._members

    def __iter__(self):
        return iter(self.phrases)

    @property
    def _members(self) -> frozenset[Phrase]:
        # Cached on first use; the dataclass is frozen, hence object.__setattr__.
        try:
            return self.__dict__["_member_cache"]
        except KeyError:
            members = frozenset(self.phrases)
            object.__setattr__(self, "_member_cache", members)
            return members

    def fingerprint(self) -> str:
        """Short content hash, used to check that pipeline artifacts match."""
        digest = hashlib.sha256()
        for phrase in self.phrases:
            digest.update(" ".join(phrase).encode("utf-8"))
            digest.update(b"\n")
        return digest.hexdigest()[:16]


@dataclass(frozen=True)
class CoverageReport:
    total_examples: int
    covered_examples: int
    per_phrase_frequency: dict[Phrase, int] = field(default_factory=dict)

    @property
    def coverage(self) -> float:
        if self.total_examples == 0:
            return 1.0
        return self.covered_examples / self.total_examples


def _as_set(ps) -> PhraseSet:
    if isinstance(ps, PhraseSet):
        return ps
    return PhraseSet(frozenset(tuple(p) for p in ps))


def phrase_frequencies(phrase_sets: Iterable[PhraseSet]) -> Counter:
    """Number of phrase sets each phrase occurs in."""
    counts: Counter = Counter()
    for ps in phrase_sets:
        counts.update(_as_set(ps).phrases)
    return counts


def _rank_key(counts: Counter):
    return lambda p: (-counts[p], p)


def is_covered(phrase_set: PhraseSet, members) -> bool:
    return phrase_set.attachable and all(p in members for p in phrase_set.phrases)


def select_frequency(phrase_sets: Sequence[PhraseSet], budget: int, corpus_id: str = "") -> PhraseVocabulary:
    """The ``budget`` phrases occurring in the most phrase sets.

    Ties go to the lexicographically smaller phrase.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    counts = phrase_frequencies(phrase_sets)
    ranked = sorted(counts, key=_rank_key(counts))
    return PhraseVocabulary(tuple(ranked[:budget]), corpus_id)


def select_greedy(phrase_sets: Sequence[PhraseSet], budget: int, corpus_id: str = "") -> PhraseVocabulary:
    """Add one phrase at a time, each time the one that newly covers the most
    phrase sets (ties: higher frequency, then lexicographic)."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    sets = [_as_set(ps) for ps in phrase_sets]
    counts = phrase_frequencies(sets)
    key = _rank_key(counts)
    # Only attachable sets can ever be covered; track what each still misses.
    missing = [set(ps.phrases) for ps in sets if ps.attachable]
    pending = [m for m in missing if m]
    chosen: list[Phrase] = []
    candidates = set(counts)
    while len(chosen) < budget and candidates:
        gains: Counter = Counter()
        for m in pending:
            if len(m) == 1:
                gains[next(iter(m))] += 1
        best = min(candidates, key=lambda p: (-gains[p],) + key(p))
        chosen.append(best)
        candidates.discard(best)
        for m in pending:
            m.discard(best)
        pending = [m for m in pending if m]
    return PhraseVocabulary(tuple(chosen), corpus_id)


def _covered_count(sets: Sequence[PhraseSet], members) -> int:
    return sum(1 for ps in sets if is_covered(ps, members))


def select_exact(phrase_sets: Sequence[PhraseSet], budget: int, corpus_id: str = "") -> PhraseVocabulary:
    """Exhaustive optimum over all subsets of at most ``budget`` phrases.

    Exponential; refuses instances with more than EXACT_MAX_PHRASES distinct
    phrases. Among optimal subsets it prefers the highest total frequency and
    then the lexicographically smallest ranked phrase list.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    sets = [_as_set(ps) for ps in phrase_sets]
    counts = phrase_frequencies(sets)
    pool = sorted(counts, key=_rank_key(counts))
    if len(pool) > EXACT_MAX_PHRASES:
        raise InstanceTooLarge(
            f"{len(pool)} distinct phrases; exact selection is limited to {EXACT_MAX_PHRASES}"
        )
    rank = _rank_key(counts)
    best_key = None
    best: tuple[Phrase, ...] = ()
    for size in range(min(budget, len(pool)) + 1):
        for subset in itertools.combinations(pool, size):
            members = frozenset(subset)
            score = (
                -_covered_count(sets, members),
                -sum(counts[p] for p in subset),
                [rank(p) for p in subset],
            )
            if best_key is None or score < best_key:
                best_key, best = score, subset
    return PhraseVocabulary(tuple(best), corpus_id)


def coverage(vocab: PhraseVocabulary | Iterable[Phrase], phrase_sets: Sequence[PhraseSet]) -> CoverageReport:
    """How many phrase sets are subsets of the vocabulary."""
    members = frozenset(tuple(p) for p in vocab)
    sets = [_as_set(ps) for ps in phrase_sets]
    return CoverageReport(
        total_examples=len(sets),
        covered_examples=_covered_count(sets, members),
        per_phrase_frequency=dict(phrase_frequencies(sets)),
    )


SELECTORS = {
    "frequency": select_frequency,
    "greedy": select_greedy,
    "exact": select_exact,
}


def write_vocab(vocab: PhraseVocabulary, path) -> None:
    lines = [f"{VOCAB_HEADER} {len(vocab)}"]
    lines.extend(" ".join(p) for p in vocab.phrases)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_vocab(path) -> PhraseVocabulary:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise VocabFormatError(f"{path}: empty vocabulary file")
    head = lines[0].split(" ")
    if len(head) != 3 or " ".join(head[:2]) != VOCAB_HEADER or not head[2].isdigit():
        raise VocabFormatError(f"{path}: bad header {lines[0]!r}")
    count = int(head[2])
    body = lines[1:]
    if len(body) != count:
        raise VocabFormatError(f"{path}: header declares {count} phrases, found {len(body)}")
    phrases = []
    for lineno, line in enumerate(body, start=2):
        phrase = tuple(line.split())
        if not phrase:
            raise VocabFormatError(f"{path}:{lineno}: empty phrase")
        phrases.append(phrase)
    if len(set(phrases)) != len(phrases):
        raise VocabFormatError(f"{path}: duplicate phrases")
    return PhraseVocabulary(tuple(phrases), path.stem)
