"""Longest-common-subsequence alignment and added-phrase extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Phrase = tuple[str, ...]


@dataclass(frozen=True)
class Alignment:
    lcs_pairs: tuple[tuple[int, int], ...]
    source_len: int
    target_len: int

    def __len__(self) -> int:
        return len(self.lcs_pairs)


@dataclass(frozen=True)
class PhraseSet:
    """Phrases one example needs added to turn its source into its target.

    ``attachable`` is False when some phrase would have to go after the last
    kept source token, which the tagging scheme cannot express unless an end
    sentinel is used. Such a set is never covered by any vocabulary.
    """

    phrases: frozenset[Phrase]
    attachable: bool = True

    def __iter__(self):
        return iter(self.phrases)

    def __len__(self) -> int:
        return len(self.phrases)


def lcs(a: Sequence[str], b: Sequence[str]) -> Alignment:
    """Longest common subsequence of two token sequences.

    O(len(a) * len(b)) time and memory. Among equally long subsequences the
    traceback matches source positions as early as it can.
    """
    n, m = len(a), len(b)
    # suffix[i][j] = LCS length of a[i:] and b[j:]
    suffix = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = suffix[i], suffix[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif suffix[i][j + 1] >= suffix[i + 1][j]:
            j += 1
        else:
            i += 1
    return Alignment(tuple(pairs), n, m)


def unaligned_runs(alignment: Alignment) -> list[tuple[int, int]]:
    """Maximal [start, end) ranges of target positions outside the LCS."""
    runs = []
    start = 0
    for _, j in alignment.lcs_pairs:
        if j > start:
            runs.append((start, j))
        start = j + 1
    if alignment.target_len > start:
        runs.append((start, alignment.target_len))
    return runs


def extract_phrase_set(
    source: Sequence[str], target: Sequence[str], sentinel: bool = False
) -> PhraseSet:
    """Added phrases needed to rebuild ``target`` from ``source``.

    Each maximal run of target tokens that the LCS leaves unmatched is one
    phrase. Without ``sentinel`` a run at the very end of the target cannot
    be attached to any kept token, and the set is marked unattachable.
    """
    alignment = lcs(source, target)
    runs = unaligned_runs(alignment)
    phrases = frozenset(tuple(target[s:e]) for s, e in runs)
    last_kept = alignment.lcs_pairs[-1][1] if alignment.lcs_pairs else -1
    trailing = any(s > last_kept for s, _ in runs)
    return PhraseSet(phrases, attachable=sentinel or not trailing)
