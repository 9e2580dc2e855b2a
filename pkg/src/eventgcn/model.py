"""Joint trigger and argument-role extractor.

The network has three stages. Token encoding concatenates word
vectors with trainable part-of-speech and entity-label embeddings.
A small MLP over the encoding classifies every token into an event
type or NONE; runs of equal non-NONE labels merge into trigger
spans. For each (trigger, entity) pair a graph convolution runs over
the pruned sub-tree of the dependency parse, and pooled node states
feed a softmax over argument roles.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ndgrad as ng
from .corpus import (
    Argument,
    CorpusError,
    EventMention,
    LabelVocab,
    Sentence,
    bio_encode,
)
from .deptree import AdjMatrix, DepTree, Span, SubTree, contextual_subtree, to_adjacency
from .ndgrad import POOLS, CheckpointError, ShapeError, Tensor

ACTIVATIONS = {"sigmoid": ng.sigmoid, "relu": ng.relu}


@dataclass
class EncoderConfig:
    """Architecture and graph-pruning hyperparameters.

    dist controls sub-tree pruning: -1 keeps the whole dependency
    tree, 0 keeps only the trigger-entity path, k > 0 expands the
    path by up to k hops. beta weights the argument loss against the
    trigger loss.
    """

    word_dim: int = 768
    pos_dim: int = 50
    entity_dim: int = 50
    gcn_layers: int = 2
    gcn_hidden: int = 200
    trigger_hidden: int = 200
    pooling: str = "max"
    activation: str = "sigmoid"
    dist: int = 1
    beta: float = 2.0
    entity_channel: bool = True

    def __post_init__(self):
        for name in ("word_dim", "pos_dim", "entity_dim", "gcn_hidden", "trigger_hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.gcn_layers < 1:
            raise ValueError(f"gcn_layers must be at least 1, got {self.gcn_layers}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.pooling not in POOLS:
            raise ValueError(f"unknown pooling {self.pooling!r}, expected one of {sorted(POOLS)}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}, expected one of {sorted(ACTIVATIONS)}"
            )

    @property
    def token_dim(self) -> int:
        dim = self.word_dim + self.pos_dim
        if self.entity_channel:
            dim += self.entity_dim
        return dim

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TriggerPrediction:
    """Per-token class ids plus merged spans (start, end, event type)."""

    token_classes: tuple[int, ...]
    spans: tuple[tuple[int, int, str], ...]


def merge_trigger_runs(ids: Sequence[int], vocab: LabelVocab) -> tuple[tuple[int, int, str], ...]:
    """Merge maximal runs of identical non-NONE class ids into spans."""
    spans = []
    start = None
    prev = 0
    for i, cid in enumerate(list(ids) + [0], start=1):
        if cid != prev:
            if prev != 0:
                spans.append((start, i - 1, vocab.trigger_labels[prev]))
            start = i if cid != 0 else None
            prev = cid
    return tuple(spans)


def trigger_targets(sentence: Sentence, vocab: LabelVocab) -> np.ndarray:
    """Gold per-token event-type ids; 0 everywhere outside trigger spans."""
    out = np.zeros(len(sentence.tokens), dtype=np.int64)
    for event in sentence.events:
        cid = vocab.trigger_id(event.type)
        out[event.trigger_start - 1 : event.trigger_end] = cid
    return out


@dataclass(frozen=True)
class PairGraph:
    """One (trigger, entity) classification instance over a pruned graph."""

    subtree: SubTree
    adjacency: AdjMatrix
    entity_id: str
    role: int


def build_pair_graph(
    tree: DepTree, trigger: Span, entity: Span, dist: int,
    entity_id: str = "", role: int = 0,
) -> PairGraph:
    sub = contextual_subtree(tree, trigger, entity, dist)
    return PairGraph(sub, to_adjacency(tree, sub), entity_id, role)


def gold_pairs(sentence: Sentence, vocab: LabelVocab, dist: int) -> list[PairGraph]:
    """Teacher-forcing pairs: every gold trigger crossed with every entity.

    The target is the annotated role when the event links the entity
    and NONE otherwise, so unlinked pairs are trained as negatives.
    """
    tree = sentence.tree()
    pairs = []
    for event in sentence.events:
        linked = {a.entity_id: vocab.role_id(a.role) for a in event.args}
        for ent in sentence.entities:
            pairs.append(
                build_pair_graph(
                    tree, event.trigger_span, ent.span, dist,
                    entity_id=ent.id, role=linked.get(ent.id, 0),
                )
            )
    return pairs


class ExtractorModel:
    """Parameter container plus the forward passes of both heads."""

    def __init__(self, config: EncoderConfig, vocab: LabelVocab, seed: int = 0):
        self.config = config
        self.vocab = vocab
        self.params: dict[str, Tensor] = {}
        rng = np.random.default_rng(seed)

        def xavier(name, fan_in, fan_out):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            data = rng.uniform(-limit, limit, (fan_in, fan_out))
            self.params[name] = Tensor(data, requires_grad=True, name=name)
            return self.params[name]

        def zeros(name, size):
            self.params[name] = Tensor(np.zeros(size), requires_grad=True, name=name)
            return self.params[name]

        cfg = config
        self.pos_table = xavier("pos_table", len(vocab.pos_labels), cfg.pos_dim)
        if cfg.entity_channel:
            self.ent_table = xavier("ent_table", len(vocab.bio_labels), cfg.entity_dim)
        else:
            self.ent_table = None
        self.trg_hidden_w = xavier("trg_hidden_w", cfg.token_dim, cfg.trigger_hidden)
        self.trg_hidden_b = zeros("trg_hidden_b", cfg.trigger_hidden)
        self.trg_out_w = xavier("trg_out_w", cfg.trigger_hidden, vocab.n_trigger_classes)
        self.trg_out_b = zeros("trg_out_b", vocab.n_trigger_classes)
        self.gcn_w = []
        self.gcn_b = []
        in_dim = cfg.token_dim
        for layer in range(cfg.gcn_layers):
            self.gcn_w.append(xavier(f"gcn_w{layer}", in_dim, cfg.gcn_hidden))
            self.gcn_b.append(zeros(f"gcn_b{layer}", cfg.gcn_hidden))
            in_dim = cfg.gcn_hidden
        self.arg_w = xavier("arg_w", 3 * cfg.gcn_hidden, vocab.n_role_classes)
        self.arg_b = zeros("arg_b", vocab.n_role_classes)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def encode_tokens(self, sentence: Sentence, word_vectors: np.ndarray) -> Tensor:
        """Concatenate word, POS and entity-label channels row-wise."""
        wv = np.asarray(word_vectors, dtype=np.float64)
        n = len(sentence.tokens)
        if wv.shape != (n, self.config.word_dim):
            raise ShapeError(
                f"word vectors for {sentence.doc_id}/{sentence.index}: "
                f"expected {(n, self.config.word_dim)}, got {wv.shape}"
            )
        pos_ids = [self.vocab.pos_id(t.pos) for t in sentence.tokens]
        parts = [Tensor(wv), ng.embedding_lookup(self.pos_table, pos_ids)]
        if self.config.entity_channel:
            bio_ids = [self.vocab.bio_id(lbl) for lbl in bio_encode(sentence)]
            parts.append(ng.embedding_lookup(self.ent_table, bio_ids))
        return ng.concat(parts, axis=1)

    def trigger_logits(self, encoding: Tensor) -> Tensor:
        hidden = ng.relu(ng.add(ng.matmul(encoding, self.trg_hidden_w), self.trg_hidden_b))
        return ng.add(ng.matmul(hidden, self.trg_out_w), self.trg_out_b)

    def predict_triggers(self, encoding: Tensor) -> TriggerPrediction:
        logits = self.trigger_logits(encoding).data
        ids = tuple(int(i) for i in logits.argmax(axis=1))
        return TriggerPrediction(ids, merge_trigger_runs(ids, self.vocab))

    def gcn_forward(self, sub: SubTree, adj: AdjMatrix, h0: Tensor) -> Tensor:
        m = len(sub.nodes)
        if h0.shape[0] != m or adj.matrix.shape[0] != m:
            raise ShapeError(
                f"gcn_forward: {m} nodes but h0 {h0.shape}, adjacency {adj.matrix.shape}"
            )
        act = ACTIVATIONS[self.config.activation]
        a = Tensor(adj.matrix)
        inv_deg = 1.0 / adj.degrees
        h = h0
        for w, b in zip(self.gcn_w, self.gcn_b):
            h = act(ng.add(ng.scale_rows(ng.matmul(a, ng.matmul(h, w)), inv_deg), b))
        return h

    def classify_argument(self, sub: SubTree, h_last: Tensor) -> Tensor:
        """Pool graph, trigger and entity states into role probabilities."""
        if h_last.shape[0] != len(sub.nodes):
            raise ShapeError(
                f"classify_argument: {len(sub.nodes)} nodes but states {h_last.shape}"
            )
        pool = POOLS[self.config.pooling]
        h_subtree = pool(h_last)
        h_trg = pool(ng.take_rows(h_last, sub.trigger_rows))
        h_ent = pool(ng.take_rows(h_last, sub.entity_rows))
        joined = ng.concat([h_subtree, h_trg, h_ent], axis=0)
        return ng.softmax(ng.add(ng.matmul(joined, self.arg_w), self.arg_b))

    def pair_probs(self, encoding: Tensor, pair: PairGraph) -> Tensor:
        h0 = ng.take_rows(encoding, [n - 1 for n in pair.subtree.nodes])
        h_last = self.gcn_forward(pair.subtree, pair.adjacency, h0)
        return self.classify_argument(pair.subtree, h_last)

    def extract_events(self, sentence: Sentence, word_vectors: np.ndarray) -> list[EventMention]:
        """Predicted triggers crossed with gold entities; NONE pairs dropped."""
        encoding = self.encode_tokens(sentence, word_vectors)
        prediction = self.predict_triggers(encoding)
        tree = sentence.tree()
        events = []
        for start, end, label in prediction.spans:
            args = []
            for ent in sentence.entities:
                pair = build_pair_graph(tree, (start, end), ent.span, self.config.dist)
                role_id = int(self.pair_probs(encoding, pair).data.argmax())
                if role_id != 0:
                    args.append(Argument(ent.id, self.vocab.role_labels[role_id]))
            events.append(EventMention(start, end, label, args))
        return events

    def save(self, path: str | Path) -> None:
        """Write parameters plus a JSON sidecar with config and vocabulary."""
        path = Path(path)
        ng.save_tensors(path, {name: t.data for name, t in self.params.items()})
        sidecar = {"config": self.config.to_dict(), "vocab": self.vocab.to_dict()}
        path.with_suffix(".json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExtractorModel":
        path = Path(path)
        sidecar_path = path.with_suffix(".json")
        if not sidecar_path.is_file():
            raise CheckpointError(f"missing checkpoint sidecar {sidecar_path}")
        try:
            sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
            config = EncoderConfig.from_dict(sidecar["config"])
            vocab = LabelVocab.from_dict(sidecar["vocab"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, CorpusError) as exc:
            raise CheckpointError(f"bad checkpoint sidecar {sidecar_path}: {exc}") from None
        model = cls(config, vocab)
        arrays = ng.load_tensors(path)
        if set(arrays) != set(model.params):
            missing = sorted(set(model.params) - set(arrays))
            extra = sorted(set(arrays) - set(model.params))
            raise CheckpointError(
                f"checkpoint parameter mismatch: missing {missing}, unexpected {extra}"
            )
        for name, tensor in model.params.items():
            if arrays[name].shape != tensor.data.shape:
                raise CheckpointError(
                    f"parameter {name}: expected shape {tensor.data.shape}, "
                    f"got {arrays[name].shape}"
                )
            tensor.data = arrays[name]
        return model


def joint_loss(
    trigger_logits: Tensor,
    gold_trigger_classes: Sequence[int],
    arg_probs: Sequence[Tensor],
    gold_roles: Sequence[int],
    beta: float,
) -> Tensor:
    """Mean trigger cross-entropy plus beta times mean argument NLL."""
    loss_trg = ng.cross_entropy(trigger_logits, gold_trigger_classes)
    if len(arg_probs) != len(gold_roles):
        raise ShapeError(
            f"joint_loss: {len(arg_probs)} probability vectors for {len(gold_roles)} roles"
        )
    if not arg_probs:
        return loss_trg
    terms = [ng.nll(p, r) for p, r in zip(arg_probs, gold_roles)]
    loss_arg = ng.scale(ng.add_n(terms), 1.0 / len(terms))
    return ng.add(loss_trg, ng.scale(loss_arg, beta))
