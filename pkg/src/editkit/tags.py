"""Edit tags and conversion of (source, target) pairs into tag sequences.

Every source token gets one tag: KEEP or DELETE, optionally with a phrase that
is inserted before the token. Fusion inputs of two sentences may also carry a
single SWAP tag on the terminator of the first sentence, which reverses the
sentence order before the other tags are applied.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from editkit.align import Phrase
from editkit.files import atomic_write_text
from editkit.text import SENTINEL, swap_position
from editkit.vocab import PhraseVocabulary


class Base(enum.Enum):
    KEEP = "KEEP"
    DELETE = "DELETE"
    SWAP = "SWAP"


@dataclass(frozen=True)
class EditTag:
    base: Base
    added_phrase: Phrase = ()

    def __post_init__(self):
        if self.base is Base.SWAP and self.added_phrase:
            raise ValueError("SWAP cannot carry an added phrase")

    def __str__(self) -> str:
        if not self.added_phrase:
            return self.base.value
        return f"{self.base.value}|{' '.join(self.added_phrase)}"

    @classmethod
    def parse(cls, label: str) -> "EditTag":
        """Inverse of ``str()``: ``"KEEP"``, ``"DELETE|,"``, ``"KEEP|, and"``."""
        base, _, phrase = label.partition("|")
        try:
            return cls(Base(base), tuple(phrase.split()))
        except ValueError:
            raise ValueError(f"invalid tag label {label!r}") from None

    @property
    def keeps_token(self) -> bool:
        return self.base is not Base.DELETE


KEEP = EditTag(Base.KEEP)
DELETE = EditTag(Base.DELETE)
SWAP = EditTag(Base.SWAP)


@dataclass(frozen=True)
class TagSequence:
    tags: tuple[EditTag, ...] = ()
    convertible: bool = True

    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __getitem__(self, i):
        return self.tags[i]

    def __str__(self) -> str:
        return " ".join(str(t) for t in self.tags)


NOT_CONVERTIBLE = TagSequence((), convertible=False)


class PhraseTrie:
    """Prefix tree over vocabulary phrases.

    Lets the conversion loop grow a candidate phrase token by token and stop as
    soon as no vocabulary phrase has the current prefix.
    """

    def __init__(self, phrases: Iterable[Phrase]):
        self.root: dict = {}
        for phrase in phrases:
            node = self.root
            for tok in phrase:
                node = node.setdefault(tok, {})
            node[None] = True

    def step(self, node: dict, token: str) -> dict | None:
        return node.get(token)

    @staticmethod
    def is_phrase_end(node: dict) -> bool:
        return None in node


@functools.lru_cache(maxsize=32)
def _trie(vocab: PhraseVocabulary) -> PhraseTrie:
    return PhraseTrie(vocab.phrases)


def _with_sentinel(tokens: Sequence[str]) -> tuple[str, ...]:
    tokens = tuple(tokens)
    if tokens and tokens[-1] == SENTINEL:
        return tokens
    return tokens + (SENTINEL,)


def _hoist_phrase(tags: list[EditTag], index: int) -> None:
    # A phrase added before a kept token realizes identically when it is
    # attached to the first token of the deletion run just before it; that
    # placement is the canonical one.
    first = index
    while first > 0 and tags[first - 1] == DELETE:
        first -= 1
    if first != index:
        tags[first] = EditTag(Base.DELETE, tags[index].added_phrase)
        tags[index] = KEEP


def convert_to_tags(
    source: Sequence[str],
    target: Sequence[str],
    vocab: PhraseVocabulary,
    sentinel: bool = False,
    hoist: bool = True,
) -> TagSequence:
    """Greedy left-to-right conversion of ``target`` into tags over ``source``.

    Each source token is matched against the current target token; failing
    that, target tokens are collected into a candidate phrase (up to the
    longest vocabulary phrase) until the token after the phrase matches the
    source token and the phrase is in the vocabulary. Unmatched source tokens
    stay DELETE. Returns ``NOT_CONVERTIBLE`` when the source runs out first.

    With ``hoist`` (the default) an added phrase that follows a run of deleted
    tokens moves onto the first token of that run. With ``sentinel`` an end
    marker is appended to both sides so phrases can be added at the very end;
    the tags then cover the source plus the marker.
    """
    if sentinel:
        source, target = _with_sentinel(source), _with_sentinel(target)
    n_s, n_t = len(source), len(target)
    max_len = vocab.max_phrase_len
    trie = _trie(vocab)
    tags = [DELETE] * n_s
    i_s = i_t = 0
    while i_t < n_t:
        if i_s >= n_s:
            return NOT_CONVERTIBLE
        if source[i_s] == target[i_t]:
            tags[i_s] = KEEP
            i_t += 1
        else:
            node = trie.root
            for j in range(1, max_len + 1):
                if i_t + j - 1 >= n_t:
                    break
                node = trie.step(node, target[i_t + j - 1])
                if node is None:
                    break
                if i_t + j < n_t and source[i_s] == target[i_t + j] and trie.is_phrase_end(node):
                    tags[i_s] = EditTag(Base.KEEP, tuple(target[i_t : i_t + j]))
                    i_t += j + 1
                    if hoist:
                        _hoist_phrase(tags, i_s)
                    break
        i_s += 1
    return TagSequence(tuple(tags), convertible=True)


def convert_with_swap(
    source: Sequence[str],
    target: Sequence[str],
    vocab: PhraseVocabulary,
    sentinel: bool = False,
    hoist: bool = True,
) -> TagSequence:
    """Like :func:`convert_to_tags`, retrying with the two source sentences
    swapped when the direct conversion fails.

    A successful retry is reported in original source order with SWAP on the
    first sentence's terminator. That token must come out as a plain KEEP in
    the swapped conversion, since SWAP realizes as KEEP; otherwise the pair is
    not convertible.
    """
    direct = convert_to_tags(source, target, vocab, sentinel=sentinel, hoist=hoist)
    if direct.convertible:
        return direct
    source = tuple(source)
    if source and source[-1] == SENTINEL:
        source = source[:-1]
    pos = swap_position(source)
    if pos is None:
        return NOT_CONVERTIBLE
    first, second = source[: pos + 1], source[pos + 1 :]
    swapped = convert_to_tags(second + first, target, vocab, sentinel=sentinel, hoist=hoist)
    if not swapped.convertible:
        return NOT_CONVERTIBLE
    k = len(second)
    tags = list(swapped.tags[k : k + len(first)] + swapped.tags[:k] + swapped.tags[len(source) :])
    if tags[pos] != KEEP:
        return NOT_CONVERTIBLE
    tags[pos] = SWAP
    return TagSequence(tuple(tags), convertible=True)


@dataclass(frozen=True)
class TagLabelIndex:
    labels: tuple[EditTag, ...]

    @functools.cached_property
    def lookup(self) -> dict[EditTag, int]:
        return {tag: i for i, tag in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def id_of(self, tag: EditTag) -> int:
        try:
            return self.lookup[tag]
        except KeyError:
            raise KeyError(f"tag {tag} is not in the label index") from None

    def tag_of(self, label_id: int) -> EditTag:
        if not 0 <= label_id < len(self.labels):
            raise IndexError(f"label id {label_id} out of range")
        return self.labels[label_id]

    def encode(self, tags: Iterable[EditTag]) -> list[int]:
        return [self.id_of(t) for t in tags]

    def decode(self, ids: Iterable[int]) -> TagSequence:
        return TagSequence(tuple(self.tag_of(i) for i in ids))

    @property
    def swap_id(self) -> int | None:
        return self.lookup.get(SWAP)


def label_index(vocab: PhraseVocabulary, enable_swap: bool = True) -> TagLabelIndex:
    """KEEP, DELETE, then KEEP|p, DELETE|p for each phrase in vocabulary
    order, then SWAP when enabled."""
    labels = [KEEP, DELETE]
    for phrase in vocab.phrases:
        labels.append(EditTag(Base.KEEP, phrase))
        labels.append(EditTag(Base.DELETE, phrase))
    if enable_swap:
        labels.append(SWAP)
    return TagLabelIndex(tuple(labels))


TAGS_HEADER = "editkit-tags v1"


class TagFileError(ValueError):
    pass


@dataclass(frozen=True)
class TaggedRecord:
    source: tuple[str, ...]
    target: tuple[str, ...]
    label_ids: tuple[int, ...] | None  # None when not convertible


def write_tagged(path, records: Iterable[TaggedRecord], vocab_fingerprint: str, swap: bool, sentinel: bool) -> None:
    """One record per line: source, target, label ids; tab separated.

    Tokens are space separated; the id field is empty for filtered examples.
    The header records which vocabulary and options produced the ids.
    """
    lines = [f"{TAGS_HEADER} vocab={vocab_fingerprint} swap={int(swap)} sentinel={int(sentinel)}"]
    for rec in records:
        ids = "" if rec.label_ids is None else " ".join(map(str, rec.label_ids))
        lines.append(f"{' '.join(rec.source)}\t{' '.join(rec.target)}\t{ids}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_tagged(path) -> tuple[dict[str, str], list[TaggedRecord]]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(TAGS_HEADER + " "):
        raise TagFileError(f"{path}: missing '{TAGS_HEADER}' header")
    meta = dict(item.split("=", 1) for item in lines[0][len(TAGS_HEADER) + 1 :].split())
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 3:
            raise TagFileError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
        src, tgt, ids = fields
        try:
            label_ids = tuple(int(x) for x in ids.split()) if ids else None
        except ValueError:
            raise TagFileError(f"{path}:{lineno}: non-integer label id") from None
        records.append(TaggedRecord(tuple(src.split()), tuple(tgt.split()), label_ids))
    return meta, records
