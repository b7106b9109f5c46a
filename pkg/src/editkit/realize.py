"""Turning a source and its tags back into text.

Realization runs in four steps: optional sentence swap, keep/delete/insert,
registered rules in registration order, then casing fixes at sentence
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from editkit.tags import Base, EditTag, TagSequence
from editkit.text import (
    SENTINEL,
    capitalize_first,
    is_title_case,
    lowercase_first,
    sentence_starts,
    swap_position,
)

POSSESSIVE_PRONOUNS = frozenset({"his", "her", "its", "their", "my", "your", "our", "whose"})


class RealizationError(ValueError):
    pass


class DuplicateRuleError(ValueError):
    pass


@dataclass
class Piece:
    """One token of the edited stream.

    ``source_index`` is None for tokens that came from an added phrase.
    ``kept`` is False for deleted source tokens, which stay in the stream so
    rules can look at them.
    """

    token: str
    source_index: int | None
    tag: EditTag
    kept: bool = True


Stream = list[Piece]


@dataclass(frozen=True)
class RealizationRule:
    name: str
    trigger: Callable[[Stream, int], bool]
    action: Callable[[Stream, int], None]


@dataclass(frozen=True)
class Realization:
    tokens: tuple[str, ...]
    firings: tuple[tuple[str, int], ...] = field(default=())


def _next_source_piece(stream: Stream, i: int) -> int | None:
    for j in range(i + 1, len(stream)):
        if stream[j].source_index is not None:
            return j
    return None


def _possessive_trigger(stream: Stream, i: int) -> bool:
    piece = stream[i]
    if piece.source_index is None or piece.kept:
        return False
    phrase = piece.tag.added_phrase
    if not phrase or phrase[-1].lower() not in POSSESSIVE_PRONOUNS:
        return False
    j = _next_source_piece(stream, i)
    return j is not None and stream[j].token == "'s"


def _possessive_action(stream: Stream, i: int) -> None:
    j = _next_source_piece(stream, i)
    stream[j].kept = False


rule_possessive = RealizationRule("possessive", _possessive_trigger, _possessive_action)


def order_for_realization(source: Sequence[str], tags: TagSequence) -> list[int]:
    """Source indices in the order they are realized.

    A SWAP on the first sentence's terminator puts the second sentence first.
    SWAP anywhere else is treated as KEEP with no reordering.
    """
    n = len(source)
    body = n - 1 if n and source[-1] == SENTINEL else n
    order = list(range(n))
    pos = swap_position(source)
    if pos is not None and tags[pos].base is Base.SWAP:
        order = list(range(pos + 1, body)) + list(range(pos + 1)) + list(range(body, n))
    return order


def _build_stream(source: Sequence[str], tags: TagSequence) -> Stream:
    stream: Stream = []
    for i in order_for_realization(source, tags):
        tag = tags[i]
        for tok in tag.added_phrase:
            stream.append(Piece(tok, None, tag))
        stream.append(Piece(source[i], i, tag, kept=tag.keeps_token))
    return stream


def _fix_case(source: Sequence[str], pieces: list[Piece]) -> list[str]:
    src_starts = sentence_starts(source)
    # Words seen with a lowercase initial somewhere in the source are common
    # words; capitalized-only words are left alone as likely proper nouns.
    lower_forms = {t.lower() for t in source if t[:1].islower()}
    tokens = [p.token for p in pieces]
    out_starts = sentence_starts(tokens)
    fixed = []
    for piece, tok, starts in zip(pieces, tokens, out_starts):
        if starts:
            if tok.islower() and tok[:1].isalpha():
                tok = capitalize_first(tok)
        elif (
            piece.source_index is not None
            and src_starts[piece.source_index]
            and is_title_case(tok)
            and tok.lower() in lower_forms
        ):
            tok = lowercase_first(tok)
        fixed.append(tok)
    return fixed


class Realizer:
    """Realization engine with an ordered list of named rules.

    The possessive rule is registered by default. Register custom rules before
    sharing the engine; realizing does not mutate it.
    """

    def __init__(self, default_rules: bool = True, adjust_case: bool = True):
        self._rules: list[RealizationRule] = [rule_possessive] if default_rules else []
        self.adjust_case = adjust_case

    @property
    def rules(self) -> tuple[RealizationRule, ...]:
        return tuple(self._rules)

    def register_rule(self, rule: RealizationRule) -> None:
        if any(r.name == rule.name for r in self._rules):
            raise DuplicateRuleError(f"rule {rule.name!r} already registered")
        self._rules.append(rule)

    def realize_detailed(self, source: Sequence[str], tags: TagSequence) -> Realization:
        if not tags.convertible:
            raise RealizationError("cannot realize a non-convertible tag sequence")
        if len(tags) != len(source):
            raise RealizationError(
                f"{len(tags)} tags for {len(source)} source tokens; prediction is corrupted"
            )
        stream = _build_stream(source, tags)
        firings = []
        for rule in self._rules:
            for i in range(len(stream)):
                if rule.trigger(stream, i):
                    rule.action(stream, i)
                    firings.append((rule.name, i))
        emitted = [p for p in stream if p.kept and p.token != SENTINEL]
        if self.adjust_case:
            tokens = _fix_case(source, emitted)
        else:
            tokens = [p.token for p in emitted]
        return Realization(tuple(tokens), tuple(firings))

    def realize(self, source: Sequence[str], tags: TagSequence) -> tuple[str, ...]:
        return self.realize_detailed(source, tags).tokens


_default = Realizer()


def realize(source: Sequence[str], tags: TagSequence) -> tuple[str, ...]:
    """Realize with the default engine (possessive rule, casing fixes)."""
    return _default.realize(source, tags)
