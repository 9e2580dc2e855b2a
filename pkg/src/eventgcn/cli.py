"""Command-line driver.

Five subcommands: prune (inspect the sub-tree kept for one
trigger-entity pair), train (run a full experiment from a config
file), eval (score an existing checkpoint), predict (write extracted
events for a corpus), and gen-synthetic (emit a synthetic corpus).

Exit codes: 0 on success, 2 for usage errors including malformed or
out-of-range spans, 1 for runtime failures. Diagnostics go to stderr;
results go to stdout or the requested files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import (
    CorpusError,
    LabelVocab,
    load_corpus,
    read_conllu,
    sentences_of,
    write_corpus,
)
from .deptree import TreeError, contextual_subtree, to_dot
from .embeddings import ContextualVectorStore, EmbeddingError
from .model import ExtractorModel
from .ndgrad import CheckpointError
from .pipeline import (
    ExperimentError,
    TrainingDiverged,
    evaluate,
    generate_corpus,
    run_experiment,
)
from .pipeline.experiment import load_experiment_config, make_provider, prepare_data

RUNTIME_ERRORS = (
    CorpusError,
    TreeError,
    EmbeddingError,
    CheckpointError,
    ExperimentError,
    TrainingDiverged,
    OSError,
)


def span_arg(text: str) -> tuple[int, int]:
    """Parse a 1-based inclusive "start:end" span."""
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected start:end, got {text!r}")
    try:
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"span bounds must be integers, got {text!r}") from None
    if not 1 <= start <= end:
        raise argparse.ArgumentTypeError(f"need 1 <= start <= end, got {text!r}")
    return start, end


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventgcn",
        description="Event extraction over pruned dependency trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prune = sub.add_parser(
        "prune", help="show the pruned sub-tree for a trigger-entity pair"
    )
    prune.add_argument("--input", required=True, help="corpus JSON or CoNLL-U file")
    prune.add_argument("--sentence", type=int, default=0, help="sentence index (default 0)")
    prune.add_argument("--trigger", required=True, type=span_arg, metavar="A:B",
                       help="trigger span, 1-based inclusive")
    prune.add_argument("--entity", required=True, type=span_arg, metavar="C:D",
                       help="entity span, 1-based inclusive")
    prune.add_argument("--dist", type=int, default=1,
                       help="expansion hops; -1 keeps the whole tree (default 1)")
    prune.add_argument("--dot", action="store_true", help="also print Graphviz DOT")
    prune.set_defaults(func=cmd_prune)

    train = sub.add_parser("train", help="train and evaluate per an experiment config")
    train.add_argument("--config", required=True, help="experiment config JSON")
    train.add_argument("--out", default=None, help="output directory override")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on the config's test split")
    ev.add_argument("--config", required=True, help="experiment config JSON")
    ev.add_argument("--checkpoint", required=True, help="model checkpoint path")
    ev.add_argument("--out", default=None, help="report file (default stdout)")
    ev.set_defaults(func=cmd_eval)

    pred = sub.add_parser("predict", help="extract events for every sentence of a corpus")
    pred.add_argument("--config", required=True, help="experiment config JSON")
    pred.add_argument("--checkpoint", required=True, help="model checkpoint path")
    pred.add_argument("--input", required=True, help="corpus JSON file or directory")
    pred.add_argument("--out", default=None, help="predictions file (default stdout)")
    pred.set_defaults(func=cmd_predict)

    gen = sub.add_parser("gen-synthetic", help="generate a synthetic corpus")
    gen.add_argument("--sentences", required=True, type=int, help="sentence count")
    gen.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--two-clause-prob", type=float, default=0.3)
    gen.add_argument("--forecast-prob", type=float, default=0.35)
    gen.set_defaults(func=cmd_gen)

    return parser


def _load_sentence(path: str, index: int):
    p = Path(path)
    if p.suffix == ".conllu":
        docs = [read_conllu(p)]
    else:
        docs = load_corpus(p)
    sentences = sentences_of(docs)
    if not 0 <= index < len(sentences):
        raise CorpusError(
            f"sentence index {index} out of range, corpus has {len(sentences)} sentences"
        )
    return sentences[index]


def cmd_prune(args) -> int:
    sentence = _load_sentence(args.input, args.sentence)
    tree = sentence.tree()
    try:
        sub = contextual_subtree(tree, args.trigger, args.entity, args.dist)
    except TreeError as exc:
        print(f"eventgcn: {exc}", file=sys.stderr)
        return 2
    print(sub.render(sentence.texts))
    if args.dot:
        print(to_dot(tree, sentence.texts, sub))
    return 0


def cmd_train(args) -> int:
    report, paths = run_experiment(args.config, output_dir=args.out)
    print(f"wrote {paths['report']}", file=sys.stderr)
    print(
        "trigger-classification F1 {:.4f}  argument-role F1 {:.4f}".format(
            report.trigger_classification.f1, report.argument_role.f1
        ),
        file=sys.stderr,
    )
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    config = load_experiment_config(args.config)
    model = ExtractorModel.load(args.checkpoint)
    _, _, test_sentences = prepare_data(config)
    provider = make_provider(config)
    if isinstance(provider, ContextualVectorStore):
        provider.check_coverage(test_sentences)
    report = evaluate(model, test_sentences, provider)
    payload = {"metrics": report.to_dict(), "test_sentences": len(test_sentences)}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    if args.out:
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    config = load_experiment_config(args.config)
    model = ExtractorModel.load(args.checkpoint)
    docs = load_corpus(args.input)
    sentences = sentences_of(docs)
    provider = make_provider(config)
    if isinstance(provider, ContextualVectorStore):
        provider.check_coverage(sentences)
    results = []
    for sent in sentences:
        events = model.extract_events(sent, provider.vectors(sent))
        results.append(
            {
                "doc_id": sent.doc_id,
                "sentence_index": sent.index,
                "text": " ".join(sent.texts),
                "events": [
                    {
                        "trigger_start": ev.trigger_start,
                        "trigger_end": ev.trigger_end,
                        "type": ev.type,
                        "args": [
                            {"entity_id": a.entity_id, "role": a.role} for a in ev.args
                        ],
                    }
                    for ev in events
                ],
            }
        )
    _emit(json.dumps(results, indent=2, sort_keys=True) + "\n", args.out)
    if args.out:
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    docs = generate_corpus(
        args.sentences, args.seed,
        two_clause_prob=args.two_clause_prob, forecast_prob=args.forecast_prob,
    )
    written = write_corpus(docs, args.out)
    print(
        f"wrote {len(docs)} documents ({args.sentences} sentences) to {args.out}",
        file=sys.stderr,
    )
    return 0 if written else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RUNTIME_ERRORS as exc:
        print(f"eventgcn: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
