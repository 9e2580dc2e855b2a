"""Experiment configuration and the end-to-end run.

A run is described by one JSON file with four sections:

- corpus: {"path": ...} to load documents, or {"synthetic":
  {"sentences": N, "seed": S, ...}} to generate them; an optional
  {"split": {"fraction": 0.7, "seed": 13}} holds out test documents
  (without it, evaluation happens on the training set);
- embeddings: {"provider": "random"|"static"|"contextual", ...};
- model: EncoderConfig fields (word_dim defaults to the provider's);
- train: TrainConfig fields.

Relative paths inside the file resolve against the file's directory.
All validation happens before any compute. Artifacts land in
output_dir: checkpoint, report JSON, per-role table, loss curve CSV
and rendered figures.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path

from ..corpus import Document, LabelVocab, load_corpus, sentences_of, split_corpus
from ..embeddings import ContextualVectorStore, RandomTable, StaticTable
from ..model import EncoderConfig, ExtractorModel
from .figures import plot_loss_curve, plot_per_role_f1
from .metrics import MetricsReport, compute_prf, evaluate
from .synthetic import generate_corpus
from .training import TrainConfig, train

CONFIG_DIR_ENV = "EVENTGCN_CONFIG_DIR"


class ExperimentError(Exception):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    corpus: dict
    embeddings: dict
    model: dict
    train: dict
    output_dir: str | None
    base_dir: Path

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _require_section(data: dict, name: str) -> dict:
    if name not in data:
        raise ExperimentError(f"config missing section {name!r}")
    section = data[name]
    if not isinstance(section, dict):
        raise ExperimentError(f"config section {name!r} must be an object")
    return section


def locate_config(path: str | Path) -> Path:
    """The path itself, or the same name under $EVENTGCN_CONFIG_DIR."""
    p = Path(path)
    if p.is_file():
        return p
    fallback = os.environ.get(CONFIG_DIR_ENV)
    if fallback:
        candidate = Path(fallback) / p
        if candidate.is_file():
            return candidate
    raise ExperimentError(f"no such config file: {path}")


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    path = locate_config(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ExperimentError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ExperimentError(f"{path}: config must be a JSON object")

    config = ExperimentConfig(
        corpus=_require_section(data, "corpus"),
        embeddings=_require_section(data, "embeddings"),
        model=dict(data.get("model", {})),
        train=dict(data.get("train", {})),
        output_dir=data.get("output_dir"),
        base_dir=path.parent,
    )
    extra = set(data) - {"corpus", "embeddings", "model", "train", "output_dir"}
    if extra:
        raise ExperimentError(f"{path}: unknown config sections {sorted(extra)}")
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> None:
    corpus = config.corpus
    has_path = "path" in corpus
    has_synth = "synthetic" in corpus
    if has_path == has_synth:
        raise ExperimentError("corpus section needs exactly one of 'path' or 'synthetic'")
    if has_path and not config.resolve(corpus["path"]).exists():
        raise ExperimentError(f"corpus path does not exist: {corpus['path']}")
    if has_synth:
        synth = corpus["synthetic"]
        if not isinstance(synth, dict) or "sentences" not in synth:
            raise ExperimentError("corpus.synthetic must give a sentence count")
    split = corpus.get("split")
    if split is not None:
        if not isinstance(split, dict) or "fraction" not in split:
            raise ExperimentError("corpus.split must give a fraction")
        if not 0 < float(split["fraction"]) <= 1:
            raise ExperimentError(f"split fraction out of range: {split['fraction']}")

    provider = config.embeddings.get("provider")
    if provider not in ("random", "static", "contextual"):
        raise ExperimentError(
            f"embeddings.provider must be random, static or contextual, got {provider!r}"
        )
    if provider in ("static", "contextual"):
        path = config.embeddings.get("path")
        if not path:
            raise ExperimentError(f"embeddings.provider {provider} needs a path")
        if not config.resolve(path).is_file():
            raise ExperimentError(f"embeddings path does not exist: {path}")

    try:
        model_cfg = dict(config.model)
        model_cfg.setdefault("word_dim", 1)
        EncoderConfig.from_dict(model_cfg)
        TrainConfig.from_dict(config.train)
    except (TypeError, ValueError) as exc:
        raise ExperimentError(f"bad model/train section: {exc}") from None


def make_provider(config: ExperimentConfig):
    emb = config.embeddings
    kind = emb["provider"]
    if kind == "random":
        return RandomTable(dim=int(emb.get("dim", 32)))
    if kind == "static":
        return StaticTable.load(config.resolve(emb["path"]))
    return ContextualVectorStore.load(config.resolve(emb["path"]))


def load_documents(config: ExperimentConfig) -> list[Document]:
    corpus = config.corpus
    if "path" in corpus:
        return load_corpus(config.resolve(corpus["path"]))
    synth = dict(corpus["synthetic"])
    return generate_corpus(
        n_sentences=int(synth["sentences"]),
        seed=int(synth.get("seed", 0)),
        two_clause_prob=float(synth.get("two_clause_prob", 0.3)),
        forecast_prob=float(synth.get("forecast_prob", 0.35)),
    )


def build_model(config: ExperimentConfig, vocab: LabelVocab, provider, seed: int) -> ExtractorModel:
    model_cfg = dict(config.model)
    if "word_dim" in model_cfg:
        if model_cfg["word_dim"] != provider.dim:
            raise ExperimentError(
                f"model.word_dim {model_cfg['word_dim']} does not match "
                f"embedding dim {provider.dim}"
            )
    else:
        model_cfg["word_dim"] = provider.dim
    return ExtractorModel(EncoderConfig.from_dict(model_cfg), vocab, seed=seed)


def write_per_role_csv(report: MetricsReport, vocab: LabelVocab, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role", "precision", "recall", "f1", "correct", "predicted", "gold"])
        for role in vocab.role_labels:
            prf = report.per_role.get(role, compute_prf(0, 0, 0))
            writer.writerow(
                [role, f"{prf.precision:.6f}", f"{prf.recall:.6f}", f"{prf.f1:.6f}",
                 prf.correct, prf.predicted, prf.gold]
            )


def write_loss_curve_csv(curve: list[tuple[int, float]], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in curve:
            writer.writerow([epoch, f"{loss:.10f}"])


def prepare_data(config: ExperimentConfig):
    """Documents plus train/test sentence lists per the split section."""
    docs = load_documents(config)
    split = config.corpus.get("split")
    if split is not None:
        train_docs, test_docs = split_corpus(
            docs, float(split["fraction"]), int(split.get("seed", 0))
        )
    else:
        train_docs, test_docs = docs, docs
    return docs, sentences_of(train_docs), sentences_of(test_docs)


def run_experiment(
    config_path: str | Path, output_dir: str | Path | None = None
) -> tuple[MetricsReport, dict[str, Path]]:
    """Split, train, evaluate and write every artifact; returns the report."""
    config = load_experiment_config(config_path)
    out = Path(output_dir or config.output_dir or "eventgcn-run")
    if not out.is_absolute() and output_dir is None and config.output_dir:
        out = config.resolve(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    docs, train_sentences, test_sentences = prepare_data(config)
    if not train_sentences:
        raise ExperimentError("training split has no sentences")

    vocab = LabelVocab.from_corpus(docs)
    provider = make_provider(config)
    if isinstance(provider, ContextualVectorStore):
        provider.check_coverage(train_sentences + test_sentences)

    train_config = TrainConfig.from_dict(config.train)
    checkpoint = out / "model.ckpt"
    train_config.checkpoint_path = str(checkpoint)
    model = build_model(config, vocab, provider, seed=train_config.seed)
    model, curve = train(model, train_sentences, provider, train_config)

    report = evaluate(model, test_sentences, provider)
    paths = {
        "checkpoint": checkpoint,
        "report": out / "report.json",
        "per_role": out / "per_role.csv",
        "loss_curve": out / "loss_curve.csv",
        "loss_figure": out / "loss_curve.png",
        "per_role_figure": out / "per_role_f1.png",
    }
    payload = {
        "metrics": report.to_dict(),
        "train_sentences": len(train_sentences),
        "test_sentences": len(test_sentences),
        "epochs_run": curve[-1][0] if curve else 0,
        "final_loss": curve[-1][1] if curve else None,
    }
    paths["report"].write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_per_role_csv(report, vocab, paths["per_role"])
    write_loss_curve_csv(curve, paths["loss_curve"])
    plot_loss_curve(curve, paths["loss_figure"])
    plot_per_role_f1(report.per_role, paths["per_role_figure"])
    return report, paths
