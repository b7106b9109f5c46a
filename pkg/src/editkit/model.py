"""Sequence taggers over the edit-tag label index.

``PerceptronModel`` is an averaged perceptron decoded greedily left to right.
In autoregressive mode ("ar") each decision sees the label predicted for the
previous token; in feedforward mode ("ff") that feature is switched off and
every token is labelled independently. ``MajorityModel`` is a sanity floor.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from editkit.files import atomic_write_text
from editkit.tags import EditTag, TagLabelIndex, TagSequence
from editkit.text import sentence_ids, sentence_starts, swap_position

MODES = ("ar", "ff")
MODEL_HEADER = "editkit-model v1"
MAJORITY_HEADER = "editkit-majority v1"


class TrainingError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    seed: int = 0
    shuffle: bool = True
    mode: str = "ar"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


def _shape(token: str) -> str:
    out = []
    for c in token:
        s = "X" if c.isupper() else "x" if c.islower() else "d" if c.isdigit() else c
        if not out or out[-1] != s:
            out.append(s)
    return "".join(out)


def token_features(tokens: Sequence[str]) -> list[list[str]]:
    """Label-independent features for every position of ``tokens``."""
    n = len(tokens)
    lower = [t.lower() for t in tokens]
    starts = sentence_starts(tokens)
    sids = sentence_ids(tokens)
    swap_at = swap_position(tokens)
    sentence_heads = {sid: lower[i] for i, sid in reversed(list(enumerate(sids)))}

    def word(i: int) -> str:
        if i < 0:
            return "<s>"
        if i >= n:
            return "</s>"
        return lower[i]

    feats = []
    for i, tok in enumerate(tokens):
        w = lower[i]
        pos = "first" if i == 0 else "last" if i == n - 1 else "mid"
        f = [
            "bias",
            f"w={w}",
            f"shape={_shape(tok)}",
            f"w-1={word(i - 1)}",
            f"w-2={word(i - 2)}",
            f"w+1={word(i + 1)}",
            f"w+2={word(i + 2)}",
            f"w-1,w={word(i - 1)},{w}",
            f"w,w+1={w},{word(i + 1)}",
            f"pos={pos}",
            f"sent={min(sids[i], 3)}",
            f"start={starts[i]}",
        ]
        for k in (1, 2, 3):
            f.append(f"p{k}={w[:k]}")
            f.append(f"s{k}={w[-k:]}")
        if i == swap_at:
            f.append("swap-site")
        # Repeated subject: the word that opens the previous sentence.
        if starts[i] and sids[i] > 0 and sentence_heads.get(sids[i] - 1) == w:
            f.append("repeats-previous-head")
        feats.append(f)
    return feats


def _prev_features(prev: str) -> list[str]:
    return [f"prev={prev}"]


def banned_labels(index: TagLabelIndex, tokens: Sequence[str]) -> list[int | None]:
    """Per position, the label id that may not be predicted there: SWAP
    everywhere except the swap site."""
    swap_id = index.swap_id
    site = swap_position(tokens)
    return [None if i == site else swap_id for i in range(len(tokens))]


class PerceptronModel:
    def __init__(self, label_index: TagLabelIndex, mode: str = "ar"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.label_index = label_index
        self.mode = mode
        self.weights: dict[str, dict[int, float]] = {}
        self.meta: dict[str, str] = {}

    def _scores(self, feats: Sequence[str]) -> dict[int, float]:
        scores: dict[int, float] = defaultdict(float)
        for f in feats:
            row = self.weights.get(f)
            if row:
                for label, w in row.items():
                    scores[label] += w
        return scores

    def _argmax(self, scores: dict[int, float], banned: int | None) -> int:
        # Highest score wins, ties go to the lowest id. Labels missing from
        # ``scores`` score 0, so only the lowest zero-scoring id competes.
        best, best_score = None, 0.0
        for label, s in scores.items():
            if label == banned:
                continue
            if best is None or s > best_score or (s == best_score and label < best):
                best, best_score = label, s
        zero = 0
        while zero == banned or scores.get(zero, 0.0) != 0.0:
            zero += 1
        if zero >= len(self.label_index):
            return best
        if best is None or best_score < 0.0 or (best_score == 0.0 and zero < best):
            return zero
        return best

    def predict_ids(self, tokens: Sequence[str], mode: str | None = None) -> list[int]:
        mode = mode or self.mode
        base_feats = token_features(tokens)
        banned = banned_labels(self.label_index, tokens)
        prev = "<start>"
        out = []
        for i, feats in enumerate(base_feats):
            if mode == "ar":
                feats = feats + _prev_features(prev)
            label = self._argmax(self._scores(feats), banned[i])
            out.append(label)
            prev = str(label)
        return out

    def predict_tags(self, tokens: Sequence[str], mode: str | None = None) -> TagSequence:
        return self.label_index.decode(self.predict_ids(tokens, mode))


def _check_examples(examples, index: TagLabelIndex) -> list[tuple[tuple[str, ...], list[int]]]:
    if not examples:
        raise TrainingError("empty training set")
    prepared = []
    for n, (tokens, tags) in enumerate(examples):
        if not tags.convertible:
            raise TrainingError(f"example {n}: tag sequence is not convertible")
        if len(tags) != len(tokens):
            raise TrainingError(f"example {n}: {len(tags)} tags for {len(tokens)} tokens")
        try:
            ids = index.encode(tags)
        except KeyError as exc:
            raise TrainingError(f"example {n}: {exc.args[0]}") from None
        prepared.append((tuple(tokens), ids))
    return prepared


def train(
    examples: Sequence[tuple[Sequence[str], TagSequence]],
    label_index: TagLabelIndex,
    config: TrainConfig = TrainConfig(),
) -> PerceptronModel:
    """Averaged-perceptron training with greedy decoding inside the loop.

    In "ar" mode the previous-label feature uses the model's own previous
    prediction, as at test time. Deterministic for a fixed config.
    """
    data = _check_examples(examples, label_index)
    model = PerceptronModel(label_index, config.mode)
    weights = model.weights
    totals: dict[tuple[str, int], float] = defaultdict(float)
    stamps: dict[tuple[str, int], int] = defaultdict(int)
    step = 0

    def update(feats, label, delta):
        for f in feats:
            row = weights.setdefault(f, {})
            w = row.get(label, 0.0)
            key = (f, label)
            totals[key] += (step - stamps[key]) * w
            stamps[key] = step
            row[label] = w + delta

    rng = random.Random(config.seed)
    cached = [(tokens, ids, token_features(tokens), banned_labels(label_index, tokens)) for tokens, ids in data]
    order = list(range(len(cached)))
    for _ in range(config.epochs):
        if config.shuffle:
            rng.shuffle(order)
        for k in order:
            tokens, gold, base_feats, banned = cached[k]
            prev = "<start>"
            for i, feats in enumerate(base_feats):
                step += 1
                if config.mode == "ar":
                    feats = feats + _prev_features(prev)
                guess = model._argmax(model._scores(feats), banned[i])
                if guess != gold[i]:
                    update(feats, gold[i], 1.0)
                    update(feats, guess, -1.0)
                prev = str(guess)

    # Replace the final weights by their average over all steps.
    averaged: dict[str, dict[int, float]] = {}
    for f, row in weights.items():
        for label, w in row.items():
            key = (f, label)
            total = totals[key] + (step - stamps[key]) * w
            avg = total / step if step else 0.0
            if avg:
                averaged.setdefault(f, {})[label] = avg
    model.weights = averaged
    model.meta = {"epochs": str(config.epochs), "seed": str(config.seed)}
    return model


class MajorityModel:
    """Predicts each token's most frequent training label, falling back to the
    most frequent label overall for unseen tokens."""

    def __init__(self, label_index: TagLabelIndex):
        self.label_index = label_index
        self.by_token: dict[str, Counter] = {}
        self.overall: Counter = Counter()
        self.meta: dict[str, str] = {}

    @staticmethod
    def _best(counts: Counter, banned: int | None) -> int | None:
        ranked = sorted((-c, label) for label, c in counts.items() if label != banned)
        return ranked[0][1] if ranked else None

    def predict_ids(self, tokens: Sequence[str], mode: str | None = None) -> list[int]:
        out = []
        for tok, banned in zip(tokens, banned_labels(self.label_index, tokens)):
            label = None
            if tok in self.by_token:
                label = self._best(self.by_token[tok], banned)
            if label is None:
                label = self._best(self.overall, banned)
            out.append(0 if label is None else label)
        return out

    def predict_tags(self, tokens: Sequence[str], mode: str | None = None) -> TagSequence:
        return self.label_index.decode(self.predict_ids(tokens))


def majority_baseline(
    examples: Sequence[tuple[Sequence[str], TagSequence]], label_index: TagLabelIndex
) -> MajorityModel:
    data = _check_examples(examples, label_index)
    model = MajorityModel(label_index)
    for tokens, ids in data:
        for tok, label in zip(tokens, ids):
            model.by_token.setdefault(tok, Counter())[label] += 1
            model.overall[label] += 1
    return model


def predict_tags(model: PerceptronModel | MajorityModel, tokens: Sequence[str], mode: str | None = None) -> TagSequence:
    """One label per token; ``mode`` overrides a perceptron's decoding mode."""
    return model.predict_tags(tokens, mode)


def token_accuracy(model, examples, mode: str | None = None) -> float:
    correct = total = 0
    for tokens, tags in examples:
        predicted = model.predict_tags(tokens, mode)
        correct += sum(p == g for p, g in zip(predicted, tags))
        total += len(tags)
    return correct / total if total else 1.0


# Persistence ---------------------------------------------------------------


def _label_lines(index: TagLabelIndex) -> list[str]:
    return [f"labels {len(index)}"] + [str(t) for t in index.labels]


def save_model(model: PerceptronModel | MajorityModel, path) -> None:
    """Plain-text model file; entries sorted so identical models give
    identical bytes."""
    meta = dict(model.meta)
    if isinstance(model, PerceptronModel):
        lines = [MODEL_HEADER, f"mode {model.mode}"]
    else:
        lines = [MAJORITY_HEADER]
    lines += [f"meta {k} {v}" for k, v in sorted(meta.items())]
    lines += _label_lines(model.label_index)
    if isinstance(model, PerceptronModel):
        triples = sorted((f, label, w) for f, row in model.weights.items() for label, w in row.items())
        lines.append(f"weights {len(triples)}")
        lines += [f"{f}\t{label}\t{w!r}" for f, label, w in triples]
    else:
        rows = sorted((tok, label, c) for tok, counts in model.by_token.items() for label, c in counts.items())
        lines.append(f"overall {' '.join(f'{l}:{c}' for l, c in sorted(model.overall.items()))}")
        lines.append(f"counts {len(rows)}")
        lines += [f"{tok}\t{label}\t{c}" for tok, label, c in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_model(path) -> PerceptronModel | MajorityModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] not in (MODEL_HEADER, MAJORITY_HEADER):
        raise ModelFormatError(f"{path}: unknown model header {lines[0] if lines else ''!r}")
    it = iter(enumerate(lines[1:], start=2))

    def expect(prefix: str) -> str:
        try:
            lineno, line = next(it)
        except StopIteration:
            raise ModelFormatError(f"{path}: truncated, expected {prefix!r}") from None
        if not line.startswith(prefix + " "):
            raise ModelFormatError(f"{path}:{lineno}: expected {prefix!r}, got {line!r}")
        return line[len(prefix) + 1 :]

    perceptron = lines[0] == MODEL_HEADER
    mode = expect("mode") if perceptron else None
    meta = {}
    lineno, line = next(it, (0, ""))
    while line.startswith("meta "):
        _, key, value = line.split(" ", 2)
        meta[key] = value
        lineno, line = next(it, (0, ""))
    if not line.startswith("labels "):
        raise ModelFormatError(f"{path}:{lineno}: expected label section")
    labels = []
    for _ in range(int(line.split()[1])):
        labels.append(EditTag.parse(next(it)[1]))
    index = TagLabelIndex(tuple(labels))
    if perceptron:
        model = PerceptronModel(index, mode)
        count = int(expect("weights"))
        for _ in range(count):
            lineno, line = next(it)
            f, label, w = line.split("\t")
            label = int(label)
            if not 0 <= label < len(index):
                raise ModelFormatError(f"{path}:{lineno}: label id {label} out of range")
            model.weights.setdefault(f, {})[label] = float(w)
    else:
        model = MajorityModel(index)
        overall = expect("overall")
        for item in overall.split():
            label, c = item.split(":")
            model.overall[int(label)] = int(c)
        count = int(expect("counts"))
        for _ in range(count):
            lineno, line = next(it)
            tok, label, c = line.split("\t")
            model.by_token.setdefault(tok, Counter())[int(label)] = int(c)
    model.meta = meta
    return model
