"""Evaluation metrics: Exact, SARI, BLEU-4, ROUGE-L and GEC P/R/F0.5.

All metrics work on word tokens produced by :func:`editkit.text.tokenize`.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from editkit.align import lcs
from editkit.files import atomic_write_text
from editkit.text import tokenize

METRIC_NAMES = ("exact", "sari", "bleu", "rouge", "gec")


@dataclass(frozen=True)
class EvalInstance:
    source: str
    prediction: str
    references: tuple[str, ...]

    def __post_init__(self):
        if not self.references:
            raise ValueError("an evaluation instance needs at least one reference")
        object.__setattr__(self, "references", tuple(self.references))


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


# Exact ----------------------------------------------------------------------


def exact_score(instances: Sequence[EvalInstance]) -> float:
    """Percentage of predictions whose tokens equal those of some reference."""
    if not instances:
        return 0.0
    hits = 0
    for inst in instances:
        pred = tokenize(inst.prediction)
        hits += any(pred == tokenize(ref) for ref in inst.references)
    return 100.0 * hits / len(instances)


# SARI -----------------------------------------------------------------------


@dataclass(frozen=True)
class SariScore:
    sari: float
    add: float
    keep: float
    delete: float


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _ratio_mean(good: Counter, base: Counter) -> float:
    # Mean over the n-grams of ``base`` of the fraction that is good; an
    # empty ``base`` scores 1.
    if not base:
        return 1.0
    return sum(good[g] / base[g] for g in base) / len(base)


def _sari_ngram(source: Sequence[str], pred: Sequence[str], refs: Sequence[Sequence[str]], n: int):
    num_refs = len(refs)
    s = _ngrams(source, n)
    c = _ngrams(pred, n)
    r_all = Counter()
    for ref in refs:
        r_all.update(_ngrams(ref, n))
    # Source and prediction counts are scaled by the number of references so
    # they are comparable with the summed reference counts.
    s_rep = Counter({g: k * num_refs for g, k in s.items()})
    c_rep = Counter({g: k * num_refs for g, k in c.items()})

    sys_keep = s_rep & c_rep
    ref_keep = s_rep & r_all
    good_keep = sys_keep & ref_keep
    keep = _f1(_ratio_mean(good_keep, sys_keep), _ratio_mean(good_keep, ref_keep))

    sys_del = s_rep - c_rep
    ref_del = s_rep - r_all
    good_del = sys_del & ref_del
    delete = _f1(_ratio_mean(good_del, sys_del), _ratio_mean(good_del, ref_del))

    sys_add = set(c) - set(s)
    ref_add = set(r_all) - set(s)
    good_add = sys_add & ref_add
    add_p = len(good_add) / len(sys_add) if sys_add else 1.0
    add_r = len(good_add) / len(ref_add) if ref_add else 1.0
    add = _f1(add_p, add_r)
    return add, keep, delete


def sari_sentence(source: Sequence[str], pred: Sequence[str], refs: Sequence[Sequence[str]]) -> SariScore:
    """Sentence SARI on tokens, as fractions in [0, 1]."""
    totals = [0.0, 0.0, 0.0]
    for n in range(1, 5):
        for k, v in enumerate(_sari_ngram(source, pred, refs, n)):
            totals[k] += v
    add, keep, delete = (t / 4 for t in totals)
    return SariScore((add + keep + delete) / 3, add, keep, delete)


def sari(instances: Sequence[EvalInstance]) -> SariScore:
    """Corpus SARI (x100): the mean of sentence scores, with components.

    For each n = 1..4 the add, keep and delete n-grams of the prediction are
    scored against those of the references (both relative to the source) with
    F1; deletion uses F1 as well rather than precision only.
    """
    if not instances:
        return SariScore(0.0, 0.0, 0.0, 0.0)
    sums = [0.0, 0.0, 0.0, 0.0]
    for inst in instances:
        sc = sari_sentence(
            tokenize(inst.source), tokenize(inst.prediction), [tokenize(r) for r in inst.references]
        )
        for k, v in enumerate((sc.sari, sc.add, sc.keep, sc.delete)):
            sums[k] += v
    return SariScore(*(100.0 * v / len(instances) for v in sums))


# BLEU -----------------------------------------------------------------------


def bleu4(instances: Sequence[EvalInstance]) -> float:
    """Corpus BLEU-4 (x100), uniform weights, no smoothing.

    Clipped n-gram matches and totals are summed over the corpus; the
    reference length of each sentence is the one closest to the hypothesis
    (shorter wins ties).
    """
    matches = [0] * 4
    totals = [0] * 4
    hyp_len = ref_len = 0
    for inst in instances:
        hyp = tokenize(inst.prediction)
        refs = [tokenize(r) for r in inst.references]
        hyp_len += len(hyp)
        ref_len += min((abs(len(r) - len(hyp)), len(r)) for r in refs)[1]
        for n in range(1, 5):
            counts = _ngrams(hyp, n)
            max_ref: Counter = Counter()
            for r in refs:
                max_ref |= _ngrams(r, n)
            matches[n - 1] += sum((counts & max_ref).values())
            totals[n - 1] += sum(counts.values())
    if hyp_len == 0 or any(m == 0 and t > 0 for m, t in zip(matches, totals)):
        return 0.0
    # An order with no hypothesis n-grams at all (every sentence shorter than
    # n) has nothing to get wrong and counts as precision 1.
    log_precision = sum(math.log(m / t) for m, t in zip(matches, totals) if t) / 4
    brevity = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision)


# ROUGE-L --------------------------------------------------------------------


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f: float


def rouge_l_sentence(pred: Sequence[str], ref: Sequence[str]) -> RougeScore:
    if not pred and not ref:
        return RougeScore(1.0, 1.0, 1.0)
    if not pred or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    k = len(lcs(pred, ref))
    r, p = k / len(ref), k / len(pred)
    return RougeScore(r, p, _f1(p, r))


def rouge_l(instances: Sequence[EvalInstance]) -> RougeScore:
    """LCS-based recall, precision and F1 (x100).

    Per instance each figure is the best over the references; the corpus
    score is the mean over instances. Recall is the headline number.
    """
    if not instances:
        return RougeScore(0.0, 0.0, 0.0)
    sums = [0.0, 0.0, 0.0]
    for inst in instances:
        pred = tokenize(inst.prediction)
        scores = [rouge_l_sentence(pred, tokenize(ref)) for ref in inst.references]
        sums[0] += max(s.recall for s in scores)
        sums[1] += max(s.precision for s in scores)
        sums[2] += max(s.f for s in scores)
    return RougeScore(*(100.0 * v / len(instances) for v in sums))


# GEC ------------------------------------------------------------------------


@dataclass(frozen=True)
class EditSpan:
    start: int
    end: int
    replacement: tuple[str, ...]

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad edit range [{self.start}, {self.end})")


def extract_edits(source: Sequence[str], other: Sequence[str]) -> list[EditSpan]:
    """Edits turning ``source`` into ``other``, read off their LCS.

    Every gap between consecutive aligned tokens becomes one span, so a
    deletion next to an insertion is a single replacement.
    """
    edits = []
    prev_i = prev_j = -1
    pairs = list(lcs(source, other).lcs_pairs) + [(len(source), len(other))]
    for i, j in pairs:
        if i > prev_i + 1 or j > prev_j + 1:
            edits.append(EditSpan(prev_i + 1, i, tuple(other[prev_j + 1 : j])))
        prev_i, prev_j = i, j
    return edits


@dataclass(frozen=True)
class GecScore:
    precision: float
    recall: float
    f05: float
    true_positives: int = 0
    predicted: int = 0
    gold: int = 0


def f_beta(p: float, r: float, beta: float = 0.5) -> float:
    b2 = beta * beta
    denom = b2 * p + r
    return (1 + b2) * p * r / denom if denom > 0 else 0.0


def _prf(tp: int, predicted: int, gold: int) -> tuple[float, float, float]:
    # No predicted edits means no false positives: precision 1. Recall with
    # nothing to find is 1 only if nothing was predicted either.
    p = tp / predicted if predicted else 1.0
    if gold:
        r = tp / gold
    else:
        r = 1.0 if predicted == 0 else 0.0
    return p, r, f_beta(p, r)


def gec_scores(instances: Sequence[EvalInstance]) -> GecScore:
    """Corpus precision, recall and F0.5 over exactly matching edits.

    Counts are accumulated over instances; for each instance the reference
    that maximizes the running F0.5 is used.
    """
    tp = predicted = gold = 0
    for inst in instances:
        src = tokenize(inst.source)
        hyp_edits = set(extract_edits(src, tokenize(inst.prediction)))
        best = None
        for ref in inst.references:
            ref_edits = set(extract_edits(src, tokenize(ref)))
            cand = (tp + len(hyp_edits & ref_edits), predicted + len(hyp_edits), gold + len(ref_edits))
            key = (_prf(*cand)[2], cand[0], -cand[2])
            if best is None or key > best[0]:
                best = (key, cand)
        tp, predicted, gold = best[1]
    p, r, f = _prf(tp, predicted, gold)
    return GecScore(p, r, f, tp, predicted, gold)


# Reports --------------------------------------------------------------------


@dataclass
class MetricsReport:
    corpus_id: str
    values: dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"corpus = {self.corpus_id}"]
        lines += [f"{k} = {v:.4f}" for k, v in self.values.items()]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "corpus_id": self.corpus_id,
            "metrics": list(self.values),
            "values": {k: round(v, 4) for k, v in self.values.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def write(self, text_path, json_path) -> None:
        atomic_write_text(text_path, self.to_text())
        atomic_write_text(json_path, self.to_json())


def evaluate(
    instances: Sequence[EvalInstance], metrics: Iterable[str] = METRIC_NAMES, corpus_id: str = ""
) -> MetricsReport:
    report = MetricsReport(corpus_id)
    v = report.values
    for name in metrics:
        if name == "exact":
            v["exact"] = exact_score(instances)
        elif name == "sari":
            s = sari(instances)
            v.update(sari=s.sari, sari_add=s.add, sari_keep=s.keep, sari_delete=s.delete)
        elif name == "bleu":
            v["bleu"] = bleu4(instances)
        elif name == "rouge":
            r = rouge_l(instances)
            v.update(rouge_l_recall=r.recall, rouge_l_precision=r.precision, rouge_l_f=r.f)
        elif name == "gec":
            g = gec_scores(instances)
            v.update(gec_precision=100.0 * g.precision, gec_recall=100.0 * g.recall, gec_f05=100.0 * g.f05)
        else:
            raise ValueError(f"unknown metric {name!r}; choose from {', '.join(METRIC_NAMES)}")
    return report
