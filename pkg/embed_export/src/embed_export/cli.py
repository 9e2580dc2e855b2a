"""embed-export command line driver."""

import argparse
import sys

from eventgcn.corpus import CorpusError
from eventgcn.embeddings import EmbeddingError

from .exporter import ExportError, export_corpus

RUNTIME_ERRORS = (ExportError, CorpusError, EmbeddingError, OSError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Export per-token contextual vectors for a corpus.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    exp = commands.add_parser("export", help="write vectors for every corpus sentence")
    exp.add_argument("--corpus", required=True, help="corpus JSON file or directory")
    exp.add_argument("--model", required=True, help="transformer checkpoint directory")
    exp.add_argument("--out", required=True, help="output vector file")
    exp.add_argument(
        "--layer", type=int, default=-1,
        help="hidden-state stack index; 0 = embeddings, -1 = last layer (default)",
    )
    exp.add_argument("--batch-size", type=int, default=8)
    exp.add_argument(
        "--overlap", type=int, default=64,
        help="subwords shared by consecutive windows on over-length sentences",
    )
    exp.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = export_corpus(
            args.corpus, args.model, args.out,
            layer=args.layer, batch_size=args.batch_size,
            overlap=args.overlap, device=args.device,
        )
    except RUNTIME_ERRORS as exc:
        print(f"embed-export: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {summary.sentences} sentences ({summary.tokens} tokens, "
        f"dim {summary.dim}) to {summary.path}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
