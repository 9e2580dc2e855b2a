"""Seeded training loop over teacher-forcing examples.

Pair graphs are pruned once up front and reused every epoch; only
the parameters change between steps. One optimizer step consumes
``batch_size`` sentences whose token losses and pair losses are
pooled into a single joint loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import ndgrad as ng
from ..corpus import LabelVocab, Sentence
from ..model import ExtractorModel, PairGraph, gold_pairs, joint_loss, trigger_targets
from ..ndgrad import Adam


class TrainingDiverged(RuntimeError):
    """Joint loss stopped being finite."""


@dataclass
class TrainConfig:
    """Optimization settings.

    beta, dist and pooling default to None, meaning the values in the
    model's EncoderConfig apply; setting them here overrides the model
    config for this run (and the override is what gets checkpointed).
    negative_ratio > 0 caps NONE pairs per sentence and epoch at that
    multiple of the positive count; 0 keeps every pair.
    """

    epochs: int = 100
    batch_size: int = 4
    learning_rate: float = 1e-3
    seed: int = 0
    shuffle: bool = True
    beta: float | None = None
    dist: int | None = None
    pooling: str | None = None
    eval_every: int = 0
    checkpoint_path: str | None = None
    negative_ratio: float = 0.0
    early_stop_loss: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.negative_ratio < 0:
            raise ValueError(f"negative_ratio must be nonnegative, got {self.negative_ratio}")

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown train config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Example:
    """One sentence with precomputed targets, vectors and pair graphs."""

    sentence: Sentence
    word_vectors: np.ndarray
    targets: np.ndarray
    pairs: list[PairGraph] = field(default_factory=list)

    @property
    def positive_rows(self) -> list[int]:
        return [i for i, p in enumerate(self.pairs) if p.role != 0]

    @property
    def negative_rows(self) -> list[int]:
        return [i for i, p in enumerate(self.pairs) if p.role == 0]


def prepare_examples(
    sentences: list[Sentence], provider, vocab: LabelVocab, dist: int
) -> list[Example]:
    return [
        Example(
            sentence=s,
            word_vectors=provider.vectors(s),
            targets=trigger_targets(s, vocab),
            pairs=gold_pairs(s, vocab, dist),
        )
        for s in sentences
    ]


def batch_loss(model: ExtractorModel, batch: list[Example], beta: float,
               pair_rows: dict[int, list[int]] | None = None) -> ng.Tensor:
    """Joint loss pooled over the batch's tokens and selected pairs."""
    logit_blocks = []
    targets: list[int] = []
    probs = []
    roles: list[int] = []
    for bi, ex in enumerate(batch):
        encoding = model.encode_tokens(ex.sentence, ex.word_vectors)
        logit_blocks.append(model.trigger_logits(encoding))
        targets.extend(int(t) for t in ex.targets)
        rows = pair_rows[bi] if pair_rows is not None else range(len(ex.pairs))
        for i in rows:
            pair = ex.pairs[i]
            probs.append(model.pair_probs(encoding, pair))
            roles.append(pair.role)
    return joint_loss(ng.concat(logit_blocks, axis=0), targets, probs, roles, beta)


def _sample_rows(ex: Example, ratio: float, rng) -> list[int]:
    if ratio <= 0:
        return list(range(len(ex.pairs)))
    keep = ex.positive_rows
    negatives = ex.negative_rows
    budget = int(round(ratio * max(1, len(keep))))
    if budget < len(negatives):
        picked = rng.choice(len(negatives), size=budget, replace=False)
        negatives = [negatives[i] for i in sorted(picked.tolist())]
    return sorted(keep + negatives)


def train(
    model: ExtractorModel,
    sentences: list[Sentence],
    provider,
    config: TrainConfig,
) -> tuple[ExtractorModel, list[tuple[int, float]]]:
    """Optimize in place; returns the model and the per-epoch loss curve."""
    if not sentences:
        raise ValueError("training set is empty")
    if config.dist is not None:
        model.config.dist = config.dist
    if config.pooling is not None:
        model.config.pooling = config.pooling
    if config.beta is not None:
        model.config.beta = config.beta
    beta = model.config.beta

    examples = prepare_examples(sentences, provider, model.vocab, model.config.dist)
    optimizer = Adam(model.params, lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)
    curve: list[tuple[int, float]] = []
    checkpoint = Path(config.checkpoint_path) if config.checkpoint_path else None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(examples)) if config.shuffle else np.arange(len(examples))
        epoch_losses = []
        for start in range(0, len(examples), config.batch_size):
            batch = [examples[i] for i in order[start : start + config.batch_size]]
            rows = {
                bi: _sample_rows(ex, config.negative_ratio, rng)
                for bi, ex in enumerate(batch)
            }
            optimizer.zero_grad()
            loss = batch_loss(model, batch, beta, rows)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDiverged(
                    f"loss is {value} at epoch {epoch}; lower the learning rate"
                )
            loss.backward()
            optimizer.step()
            epoch_losses.append(value)
        mean_loss = float(np.mean(epoch_losses))
        curve.append((epoch, mean_loss))
        if checkpoint and config.eval_every and epoch % config.eval_every == 0:
            model.save(checkpoint)
        if config.early_stop_loss and mean_loss <= config.early_stop_loss:
            break
    if checkpoint:
        model.save(checkpoint)
    return model, curve
