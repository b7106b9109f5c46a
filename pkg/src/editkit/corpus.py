"""Parallel corpora: TSV ingestion, corpus-wide conversion and coverage curves."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from editkit.align import PhraseSet, extract_phrase_set, lcs
from editkit.tags import TagSequence, convert_to_tags, convert_with_swap
from editkit.text import SENTINEL, swap_position, tokenize
from editkit.vocab import PhraseVocabulary, coverage, select_frequency

TASK_KINDS = ("fusion", "split", "summarization", "gec", "generic")
SPLITS = ("train", "validation", "test")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class EditExample:
    source: str
    target: str
    split: str = "train"
    extra_references: tuple[str, ...] = ()
    tags: TagSequence | None = None

    @property
    def convertible(self) -> bool | None:
        return None if self.tags is None else self.tags.convertible

    @property
    def references(self) -> tuple[str, ...]:
        return (self.target,) + self.extra_references

    def source_tokens(self, sentinel: bool = False) -> tuple[str, ...]:
        toks = tokenize(self.source)
        return toks + (SENTINEL,) if sentinel else toks

    def target_tokens(self) -> tuple[str, ...]:
        return tokenize(self.target)


@dataclass
class ParallelCorpus:
    examples: list[EditExample]
    kind: str = "generic"
    corpus_id: str = ""

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise CorpusError(f"unknown task kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def split(self, *names: str) -> "ParallelCorpus":
        """Sub-corpus holding only the given split labels."""
        chosen = [ex for ex in self.examples if ex.split in names]
        return ParallelCorpus(chosen, self.kind, f"{self.corpus_id}:{'+'.join(names)}")

    @property
    def swap_enabled(self) -> bool:
        return self.kind == "fusion"


@dataclass(frozen=True)
class ConversionStats:
    total: int
    convertible: int
    filtered: int

    @property
    def convertible_fraction(self) -> float:
        return self.convertible / self.total if self.total else 1.0


def read_tsv(path, kind: str = "generic") -> ParallelCorpus:
    """Read ``source<TAB>target[<TAB>split][<TAB>ref2...]`` lines.

    A missing or empty split field means ``train``.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    examples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split("\t")
        if len(fields) < 2:
            raise CorpusError(f"{path}:{lineno}: expected at least 2 tab-separated fields, got {len(fields)}")
        source, target = fields[0], fields[1]
        if not source.strip():
            raise CorpusError(f"{path}:{lineno}: empty source")
        split = fields[2] if len(fields) > 2 and fields[2] else "train"
        if split not in SPLITS:
            raise CorpusError(f"{path}:{lineno}: unknown split {split!r}")
        examples.append(EditExample(source, target, split, tuple(fields[3:])))
    if not examples:
        raise CorpusError(f"{path}: no examples")
    return ParallelCorpus(examples, kind, path.stem)


def bundled_path(name: str) -> Path:
    """Path of a corpus shipped with the package, e.g. ``fusion_mini.tsv``."""
    return Path(str(resources.files("editkit") / "data" / name))


def load_bundled(name: str = "fusion_mini.tsv", kind: str = "fusion") -> ParallelCorpus:
    return read_tsv(bundled_path(name), kind)


def example_phrase_set(example: EditExample, swap: bool, sentinel: bool = False) -> PhraseSet:
    """Phrase set of one example.

    With ``swap``, a two-sentence source is compared in whichever sentence
    order shares the longer LCS with the target (direct order on ties).
    """
    src, tgt = example.source_tokens(), example.target_tokens()
    if swap:
        pos = swap_position(src)
        if pos is not None:
            swapped = src[pos + 1 :] + src[: pos + 1]
            if len(lcs(swapped, tgt)) > len(lcs(src, tgt)):
                src = swapped
    return extract_phrase_set(src, tgt, sentinel=sentinel)


def phrase_sets(corpus: ParallelCorpus, sentinel: bool = False, swap: bool | None = None) -> list[PhraseSet]:
    swap = corpus.swap_enabled if swap is None else swap
    return [example_phrase_set(ex, swap, sentinel) for ex in corpus]


def convert_example(
    example: EditExample, vocab: PhraseVocabulary, swap: bool, sentinel: bool = False
) -> TagSequence:
    convert = convert_with_swap if swap else convert_to_tags
    return convert(example.source_tokens(), example.target_tokens(), vocab, sentinel=sentinel)


def convert_corpus(
    corpus: ParallelCorpus, vocab: PhraseVocabulary, sentinel: bool = False, swap: bool | None = None
) -> tuple[ParallelCorpus, ConversionStats]:
    """Tag every example; non-convertible ones keep an empty, flagged tag
    sequence so they can be counted and filtered."""
    swap = corpus.swap_enabled if swap is None else swap
    tagged = [
        dataclasses.replace(ex, tags=convert_example(ex, vocab, swap, sentinel)) for ex in corpus
    ]
    ok = sum(1 for ex in tagged if ex.tags.convertible)
    stats = ConversionStats(len(tagged), ok, len(tagged) - ok)
    return ParallelCorpus(tagged, corpus.kind, corpus.corpus_id), stats


@dataclass(frozen=True)
class CoveragePoint:
    budget: int
    vocab_size: int
    coverage: float


@dataclass
class CoverageCurve:
    points: list[CoveragePoint] = field(default_factory=list)
    coverable_fraction: float = 1.0

    def is_monotone(self) -> bool:
        values = [p.coverage for p in self.points]
        return all(a <= b for a, b in zip(values, values[1:]))


def stats_report(
    corpus: ParallelCorpus, sweep: Sequence[int], sentinel: bool = False, swap: bool | None = None
) -> CoverageCurve:
    """Coverage of the frequency vocabulary for every budget in ``sweep``.

    ``coverable_fraction`` is the ceiling the curve plateaus at: the share of
    examples whose phrase set is attachable at all.
    """
    sets = phrase_sets(corpus, sentinel=sentinel, swap=swap)
    ceiling = sum(1 for ps in sets if ps.attachable) / len(sets) if sets else 1.0
    curve = CoverageCurve(coverable_fraction=ceiling)
    for budget in sorted(sweep):
        vocab = select_frequency(sets, budget, corpus.corpus_id)
        curve.points.append(CoveragePoint(budget, len(vocab), coverage(vocab, sets).coverage))
    return curve
