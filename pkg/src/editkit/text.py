"""Word-level tokenization, detokenization and sentence utilities.

A token sequence is a plain tuple of strings. Tokens never contain
whitespace; casing is preserved exactly as written.
"""

from __future__ import annotations

from typing import Iterable, Sequence

TokenSequence = tuple[str, ...]

SENTENCE_FINAL = frozenset({".", "!", "?"})
LEADING_PUNCT = frozenset({'"', "'", "("})
TRAILING_PUNCT = frozenset({".", ",", "!", "?", ";", ":", '"', "'", ")"})
CLITIC = "'s"
NO_SPACE_BEFORE = frozenset({".", ",", "!", "?", ";", ":", ")", CLITIC})
NO_SPACE_AFTER = frozenset({"("})

# Separator between output sentences in sentence-split targets.
SPLIT_SEPARATOR = "<::::>"
# Appended to source and target in end-sentinel mode.
SENTINEL = "[END]"


def is_sentence_final(token: str) -> bool:
    return token in SENTENCE_FINAL


def _split_chunk(chunk: str) -> list[str]:
    # Trailing material first, so a bare "'s" is recognised before the
    # leading quote rule can split it.
    trailing: list[str] = []
    while chunk != CLITIC:
        if chunk.endswith(CLITIC):
            trailing.append(CLITIC)
            chunk = chunk[: -len(CLITIC)]
        elif len(chunk) > 1 and chunk[-1] in TRAILING_PUNCT:
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        else:
            break
    leading: list[str] = []
    while len(chunk) > 1 and chunk[0] in LEADING_PUNCT and chunk != CLITIC:
        leading.append(chunk[0])
        chunk = chunk[1:]
    return leading + [chunk] + trailing[::-1]


def tokenize(text: str) -> TokenSequence:
    """Split ``text`` into word tokens.

    Whitespace separates chunks; punctuation from a small fixed set is peeled
    off both ends of each chunk, and the possessive clitic ``'s`` becomes a
    token of its own.

    >>> tokenize("Dylan won Nobel prize.")
    ('Dylan', 'won', 'Nobel', 'prize', '.')
    >>> tokenize("Crane's house")
    ('Crane', "'s", 'house')
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tuple(tokens)


def detokenize(tokens: Iterable[str]) -> str:
    """Join tokens into text; inverse of :func:`tokenize` on its own output."""
    out: list[str] = []
    prev = None
    for tok in tokens:
        if prev is not None and tok not in NO_SPACE_BEFORE and prev not in NO_SPACE_AFTER:
            out.append(" ")
        out.append(tok)
        prev = tok
    return "".join(out)


def split_sentences(tokens: Sequence[str]) -> list[TokenSequence]:
    """Split after every sentence-final token. Concatenating the parts
    gives back the input."""
    sentences: list[TokenSequence] = []
    current: list[str] = []
    for tok in tokens:
        current.append(tok)
        if tok in SENTENCE_FINAL:
            sentences.append(tuple(current))
            current = []
    if current:
        sentences.append(tuple(current))
    return sentences


def sentence_starts(tokens: Sequence[str]) -> list[bool]:
    """Flag the tokens that open a sentence.

    A token opens a sentence when it is first, or follows a sentence-final
    token or the split separator.
    """
    flags = []
    prev = None
    for tok in tokens:
        flags.append(prev is None or prev in SENTENCE_FINAL or prev == SPLIT_SEPARATOR)
        prev = tok
    return flags


def sentence_ids(tokens: Sequence[str]) -> list[int]:
    ids = []
    current = 0
    for tok in tokens:
        ids.append(current)
        if tok in SENTENCE_FINAL:
            current += 1
    return ids


def swap_position(tokens: Sequence[str]) -> int | None:
    """Index of the token that may carry SWAP, or None.

    Only a source of exactly two sentences whose first sentence ends in a
    terminator is eligible; the SWAP site is that terminator. A trailing end
    sentinel is ignored.
    """
    if tokens and tokens[-1] == SENTINEL:
        tokens = tokens[:-1]
    sentences = split_sentences(tokens)
    if len(sentences) != 2 or sentences[0][-1] not in SENTENCE_FINAL:
        return None
    return len(sentences[0]) - 1


def capitalize_first(token: str) -> str:
    return token[:1].upper() + token[1:]


def lowercase_first(token: str) -> str:
    return token[:1].lower() + token[1:]


def is_title_case(token: str) -> bool:
    """True for 'Word'-shaped tokens: an uppercase first letter and no other
    uppercase letters."""
    return len(token) > 1 and token[0].isupper() and not any(c.isupper() for c in token[1:])
