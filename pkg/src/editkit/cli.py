"""Command-line pipeline: vocab -> convert -> train -> predict -> realize -> eval.

Every stage reads and writes plain files so stages can be rerun and
recombined. Diagnostics go to stderr; data only goes to the named files.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from editkit import corpus as corpus_mod
from editkit import metrics as metrics_mod
from editkit.files import atomic_write_text
from editkit.model import MajorityModel, TrainConfig, load_model, majority_baseline, save_model, train
from editkit.realize import realize
from editkit.tags import TaggedRecord, label_index, read_tagged, write_tagged
from editkit.text import SENTINEL, detokenize, tokenize
from editkit.vocab import DEFAULT_BUDGET, SELECTORS, phrase_frequencies, read_vocab, write_vocab

logger = logging.getLogger("editkit")


class PipelineError(Exception):
    pass


@dataclass
class PipelineConfig:
    vocab_size: int = DEFAULT_BUDGET
    method: str = "frequency"
    sentinel: bool = False
    swap: bool | None = None  # None: on for fusion corpora only
    epochs: int = 20
    seed: int = 0
    mode: str = "ar"
    metrics: tuple[str, ...] = metrics_mod.METRIC_NAMES
    kind: str = "fusion"
    model_type: str = "perceptron"

    def __post_init__(self):
        if self.vocab_size < 0:
            raise PipelineError("vocab_size must be >= 0")
        if self.method not in ("frequency", "greedy"):
            raise PipelineError(f"method must be frequency or greedy, got {self.method!r}")
        if self.mode not in ("ar", "ff"):
            raise PipelineError(f"mode must be ar or ff, got {self.mode!r}")
        if self.kind not in corpus_mod.TASK_KINDS:
            raise PipelineError(f"unknown corpus kind {self.kind!r}")
        if self.model_type not in ("perceptron", "majority"):
            raise PipelineError(f"model_type must be perceptron or majority, got {self.model_type!r}")
        unknown = set(self.metrics) - set(metrics_mod.METRIC_NAMES)
        if unknown:
            raise PipelineError(f"unknown metrics: {', '.join(sorted(unknown))}")

    def swap_for(self, kind: str) -> bool:
        return kind == "fusion" if self.swap is None else self.swap


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise PipelineError(f"not a boolean: {value!r}")


_CONVERTERS = {
    "vocab_size": int,
    "method": str,
    "sentinel": _parse_bool,
    "swap": _parse_bool,
    "epochs": int,
    "seed": int,
    "mode": str,
    "metrics": lambda v: tuple(m.strip() for m in v.split(",") if m.strip()),
    "kind": str,
    "model_type": str,
}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file. Blank lines and ``#`` comments are
    ignored; unknown keys are an error."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PipelineError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONVERTERS:
            raise PipelineError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError:
            raise PipelineError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then the config file, then EDITKIT_SEED, then flags."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    if os.environ.get("EDITKIT_SEED"):
        try:
            values["seed"] = int(os.environ["EDITKIT_SEED"])
        except ValueError:
            raise PipelineError(f"EDITKIT_SEED is not an integer: {os.environ['EDITKIT_SEED']!r}") from None
    for field in dataclasses.fields(PipelineConfig):
        flag = getattr(args, field.name, None)
        if flag is not None:
            values[field.name] = flag
    return PipelineConfig(**values)


def _load_corpus(path, cfg: PipelineConfig, split: str) -> corpus_mod.ParallelCorpus:
    corpus = corpus_mod.read_tsv(path, cfg.kind)
    if split != "all":
        corpus = corpus.split(*split.split(","))
        if not len(corpus):
            raise PipelineError(f"{path}: no examples in split {split!r}")
    return corpus


# Commands -------------------------------------------------------------------


def cmd_vocab(args, cfg: PipelineConfig) -> None:
    corpus = _load_corpus(args.corpus, cfg, args.split)
    sets = corpus_mod.phrase_sets(corpus, sentinel=cfg.sentinel, swap=cfg.swap_for(corpus.kind))
    pool = len(phrase_frequencies(sets))
    if cfg.vocab_size > pool:
        logger.warning("vocab size %d exceeds the %d candidate phrases; using all of them", cfg.vocab_size, pool)
    vocab = SELECTORS[cfg.method](sets, cfg.vocab_size, corpus.corpus_id)
    write_vocab(vocab, args.output)
    logger.info("wrote %d phrases to %s", len(vocab), args.output)


def cmd_convert(args, cfg: PipelineConfig) -> None:
    corpus = _load_corpus(args.corpus, cfg, args.split)
    vocab = read_vocab(args.vocab)
    swap = cfg.swap_for(corpus.kind)
    index = label_index(vocab, enable_swap=swap)
    tagged, stats = corpus_mod.convert_corpus(corpus, vocab, sentinel=cfg.sentinel, swap=swap)
    records = []
    for ex in tagged:
        ids = tuple(index.encode(ex.tags)) if ex.tags.convertible else None
        records.append(TaggedRecord(ex.source_tokens(cfg.sentinel), ex.target_tokens(), ids))
    write_tagged(args.output, records, vocab.fingerprint(), swap, cfg.sentinel)
    summary = (
        f"total = {stats.total}\nconvertible = {stats.convertible}\n"
        f"filtered = {stats.filtered}\nconvertible_fraction = {stats.convertible_fraction:.4f}\n"
    )
    if args.stats:
        atomic_write_text(args.stats, summary)
    logger.info("converted %d/%d examples (%.2f%%)", stats.convertible, stats.total, 100 * stats.convertible_fraction)


def _check_vocab(meta: dict, vocab, what: str) -> None:
    if meta.get("vocab") != vocab.fingerprint():
        raise PipelineError(
            f"{what} was produced with vocabulary {meta.get('vocab')}, but the given vocabulary is {vocab.fingerprint()}"
        )


def cmd_train(args, cfg: PipelineConfig) -> None:
    meta, records = read_tagged(args.tagged)
    vocab = read_vocab(args.vocab)
    _check_vocab(meta, vocab, args.tagged)
    index = label_index(vocab, enable_swap=meta.get("swap") == "1")
    examples = [(r.source, index.decode(r.label_ids)) for r in records if r.label_ids is not None]
    if not examples:
        raise PipelineError(f"{args.tagged}: no convertible examples to train on")
    if cfg.model_type == "majority":
        model = majority_baseline(examples, index)
    else:
        model = train(examples, index, TrainConfig(epochs=cfg.epochs, seed=cfg.seed, mode=cfg.mode))
    model.meta.update(vocab=vocab.fingerprint(), swap=meta.get("swap", "0"), sentinel=meta.get("sentinel", "0"))
    save_model(model, args.output)
    logger.info("trained %s on %d examples", cfg.model_type, len(examples))


def _read_sources(path, cfg: PipelineConfig, split: str, plain: bool) -> list[tuple[str, str]]:
    """(source, reference) pairs; references are empty for plain input."""
    if plain:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return [(line, "") for line in lines]
    corpus = _load_corpus(path, cfg, split)
    return [(ex.source, ex.target) for ex in corpus]


def cmd_predict(args, cfg: PipelineConfig) -> None:
    model = load_model(args.model)
    sentinel = model.meta.get("sentinel") == "1"
    mode = args.mode if not isinstance(model, MajorityModel) else None
    records = []
    for source, reference in _read_sources(args.sources, cfg, args.split, args.plain):
        tokens = corpus_mod.EditExample(source, reference).source_tokens(sentinel)
        ids = model.predict_ids(tokens, mode)
        if len(ids) != len(tokens):
            raise PipelineError("model returned the wrong number of labels")
        records.append(TaggedRecord(tokens, tokenize(reference), tuple(ids)))
    write_tagged(args.output, records, model.meta.get("vocab", ""), model.meta.get("swap") == "1", sentinel)
    logger.info("tagged %d sources", len(records))


def cmd_realize(args, cfg: PipelineConfig) -> None:
    meta, records = read_tagged(args.tags)
    vocab = read_vocab(args.vocab)
    _check_vocab(meta, vocab, args.tags)
    index = label_index(vocab, enable_swap=meta.get("swap") == "1")
    if args.sources:
        sources = _read_sources(args.sources, cfg, args.split, args.plain)
        if len(sources) != len(records):
            raise PipelineError(f"{len(sources)} sources but {len(records)} tag records")
        sentinel = meta.get("sentinel") == "1"
        for n, ((src, _), rec) in enumerate(zip(sources, records), start=1):
            expected = corpus_mod.EditExample(src, "").source_tokens(sentinel)
            if expected != rec.source:
                raise PipelineError(f"record {n}: source tokens do not match the tag file")
    lines = []
    for rec in records:
        if rec.label_ids is None:
            # Filtered example: fall back to the unchanged source.
            lines.append(detokenize(t for t in rec.source if t != SENTINEL))
            continue
        if len(rec.label_ids) != len(rec.source):
            raise PipelineError(f"{len(rec.label_ids)} tags for {len(rec.source)} tokens")
        lines.append(detokenize(realize(rec.source, index.decode(rec.label_ids))))
    atomic_write_text(args.output, "".join(line + "\n" for line in lines))


def cmd_eval(args, cfg: PipelineConfig) -> None:
    predictions = Path(args.predictions).read_text(encoding="utf-8").splitlines()
    if args.corpus:
        corpus = _load_corpus(args.corpus, cfg, args.split)
        sources = [ex.source for ex in corpus]
        references = [ex.references for ex in corpus]
        corpus_id = corpus.corpus_id
    else:
        if not (args.sources and args.references):
            raise PipelineError("eval needs --corpus, or --sources with --references")
        sources = Path(args.sources).read_text(encoding="utf-8").splitlines()
        ref_files = [Path(p).read_text(encoding="utf-8").splitlines() for p in args.references]
        if any(len(r) != len(sources) for r in ref_files):
            raise PipelineError("reference files and sources differ in length")
        references = [tuple(r[i] for r in ref_files) for i in range(len(sources))]
        corpus_id = Path(args.sources).stem
    if len(predictions) != len(sources):
        raise PipelineError(f"{len(predictions)} predictions for {len(sources)} sources")
    instances = [metrics_mod.EvalInstance(s, p, r) for s, p, r in zip(sources, predictions, references)]
    report = metrics_mod.evaluate(instances, cfg.metrics, corpus_id)
    out = Path(args.output)
    report.write(out, out.with_suffix(".json"))
    logger.info("report written to %s\n%s", out, report.to_text().rstrip())


def cmd_stats(args, cfg: PipelineConfig) -> None:
    corpus = _load_corpus(args.corpus, cfg, args.split)
    sweep = [int(x) for x in args.sweep.split(",") if x.strip()]
    if any(x < 0 for x in sweep):
        raise PipelineError("sweep budgets must be >= 0")
    curve = corpus_mod.stats_report(corpus, sweep, sentinel=cfg.sentinel, swap=cfg.swap_for(corpus.kind))
    lines = ["budget\tvocab_size\tcoverage"]
    lines += [f"{p.budget}\t{p.vocab_size}\t{p.coverage:.4f}" for p in curve.points]
    lines.append(f"# coverable_fraction\t{curve.coverable_fraction:.4f}")
    atomic_write_text(args.output, "\n".join(lines) + "\n")


# Argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--kind", choices=corpus_mod.TASK_KINDS, default=None)
    common.add_argument("--sentinel", action="store_true", default=None, help="allow insertions at the end")
    swap = common.add_mutually_exclusive_group()
    swap.add_argument("--swap", dest="swap", action="store_true", default=None)
    swap.add_argument("--no-swap", dest="swap", action="store_false")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="editkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vocab", parents=[common], help="build a phrase vocabulary")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--vocab-size", dest="vocab_size", type=int)
    p.add_argument("--method", choices=("frequency", "greedy"))
    p.add_argument("--split", default="train", help="split(s) to learn from, comma separated, or 'all'")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("convert", parents=[common], help="convert targets into tag sequences")
    p.add_argument("corpus")
    p.add_argument("--vocab", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stats", help="write conversion statistics here")
    p.add_argument("--split", default="all")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("train", parents=[common], help="train a tagger on a tagged file")
    p.add_argument("tagged")
    p.add_argument("--vocab", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("ar", "ff"))
    p.add_argument("--model-type", dest="model_type", choices=("perceptron", "majority"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="tag sources with a trained model")
    p.add_argument("model")
    p.add_argument("sources", help="corpus TSV (or plain text with --plain)")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--plain", action="store_true", help="sources are one text per line")
    p.add_argument("--mode", choices=("ar", "ff"), help="override the model's decoding mode")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("realize", parents=[common], help="turn tag files into text")
    p.add_argument("tags")
    p.add_argument("--vocab", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sources", help="cross-check against these sources")
    p.add_argument("--split", default="test")
    p.add_argument("--plain", action="store_true")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("eval", parents=[common], help="score predictions")
    p.add_argument("predictions")
    p.add_argument("--corpus", help="corpus TSV with sources and references")
    p.add_argument("--split", default="test")
    p.add_argument("--sources")
    p.add_argument("--references", nargs="+")
    p.add_argument("--metrics", type=_CONVERTERS["metrics"])
    p.add_argument("-o", "--output", required=True, help="text report; JSON goes next to it")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", parents=[common], help="coverage curve over vocabulary sizes")
    p.add_argument("corpus")
    p.add_argument("--sweep", default="0,1,2,5,10,20,50,100,200,500")
    p.add_argument("--split", default="all")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except (PipelineError, OSError, ValueError, KeyError) as exc:
        print(f"editkit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
