"""Corpus types, JSON (de)serialization, validation, splits and label vocab.

A document is one JSON file: ``{"doc_id": ..., "sentences": [...]}`` where
each sentence carries its tokens (text, pos, 1-based head with 0 for the
root, deprel), entity mentions (inclusive 1-based spans) and event mentions
(trigger span, type, arguments referencing entity ids). Loading validates
structure eagerly so that downstream code never sees a malformed sentence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .deptree import DepTree, TreeError, build_tree


class CorpusError(ValueError):
    """Malformed corpus file or a sentence violating a structural rule."""


@dataclass
class Token:
    text: str
    pos: str
    head: int
    deprel: str


@dataclass
class EntityMention:
    id: str
    start: int
    end: int
    type: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class Argument:
    entity_id: str
    role: str


@dataclass
class EventMention:
    trigger_start: int
    trigger_end: int
    type: str
    args: list[Argument] = field(default_factory=list)

    @property
    def trigger_span(self) -> tuple[int, int]:
        return (self.trigger_start, self.trigger_end)


@dataclass
class Sentence:
    doc_id: str
    index: int
    tokens: list[Token]
    entities: list[EntityMention] = field(default_factory=list)
    events: list[EventMention] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def heads(self) -> list[int]:
        return [t.head for t in self.tokens]

    def tree(self) -> DepTree:
        return build_tree(self.heads, [t.deprel for t in self.tokens])

    def entity_by_id(self, entity_id: str) -> EntityMention:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise KeyError(entity_id)


@dataclass
class Document:
    doc_id: str
    sentences: list[Sentence]

    @property
    def event_count(self) -> int:
        return sum(len(s.events) for s in self.sentences)


# ---------------------------------------------------------------------------
# validation


def _fail(doc_id: str, sent_index: int | None, rule: str) -> None:
    where = doc_id if sent_index is None else f"{doc_id} sentence {sent_index}"
    raise CorpusError(f"{where}: {rule}")


def _spans_clash(a: EntityMention, b: EntityMention) -> bool:
    """True when the spans overlap without one containing the other."""
    if a.end < b.start or b.end < a.start:
        return False
    nested = (a.start <= b.start and b.end <= a.end) or (
        b.start <= a.start and a.end <= b.end
    )
    return not nested


def validate_sentence(sent: Sentence, vocab: "LabelVocab | None" = None) -> None:
    doc_id, idx = sent.doc_id, sent.index
    n = len(sent.tokens)
    if n == 0:
        _fail(doc_id, idx, "sentence has no tokens")
    for i, tok in enumerate(sent.tokens, start=1):
        if not tok.text:
            _fail(doc_id, idx, f"token {i} has empty text")
    try:
        sent.tree()
    except TreeError as err:
        _fail(doc_id, idx, f"bad dependency tree: {err}")
    seen_ids: set[str] = set()
    for ent in sent.entities:
        if not ent.id:
            _fail(doc_id, idx, "entity with empty id")
        if ent.id in seen_ids:
            _fail(doc_id, idx, f"duplicate entity id {ent.id!r}")
        seen_ids.add(ent.id)
        if not (1 <= ent.start <= ent.end <= n):
            _fail(doc_id, idx, f"entity {ent.id!r} span {ent.start}:{ent.end} out of range 1..{n}")
        if vocab is not None and ent.type not in vocab.entity_types:
            _fail(doc_id, idx, f"entity {ent.id!r} has unknown type {ent.type!r}")
    for a_i, a in enumerate(sent.entities):
        for b in sent.entities[a_i + 1 :]:
            if _spans_clash(a, b):
                _fail(
                    doc_id,
                    idx,
                    f"entities {a.id!r} and {b.id!r} overlap without nesting",
                )
    for ev_i, ev in enumerate(sent.events):
        if not (1 <= ev.trigger_start <= ev.trigger_end <= n):
            _fail(
                doc_id,
                idx,
                f"event {ev_i} trigger span {ev.trigger_start}:{ev.trigger_end} out of range 1..{n}",
            )
        if not ev.type:
            _fail(doc_id, idx, f"event {ev_i} has empty type")
        if vocab is not None and ev.type not in vocab.event_types:
            _fail(doc_id, idx, f"event {ev_i} has unknown type {ev.type!r}")
        linked: set[str] = set()
        for arg in ev.args:
            if arg.entity_id not in seen_ids:
                _fail(doc_id, idx, f"event {ev_i} argument references unknown entity {arg.entity_id!r}")
            if arg.entity_id in linked:
                _fail(doc_id, idx, f"event {ev_i} links entity {arg.entity_id!r} twice")
            linked.add(arg.entity_id)
            if not arg.role:
                _fail(doc_id, idx, f"event {ev_i} argument {arg.entity_id!r} has empty role")
            if vocab is not None and arg.role not in vocab.roles:
                _fail(doc_id, idx, f"event {ev_i} argument has unknown role {arg.role!r}")


def validate_document(doc: Document, vocab: "LabelVocab | None" = None) -> None:
    if not doc.doc_id:
        raise CorpusError("document with empty doc_id")
    if not doc.sentences:
        _fail(doc.doc_id, None, "document has no sentences")
    for sent in doc.sentences:
        validate_sentence(sent, vocab)


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise CorpusError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise CorpusError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def _parse_document(raw: dict, where: str) -> Document:
    doc_id = _require(raw, "doc_id", str, where)
    sentences_raw = _require(raw, "sentences", list, where)
    sentences = []
    for s_i, s_raw in enumerate(sentences_raw):
        if not isinstance(s_raw, dict):
            raise CorpusError(f"{where}: sentence {s_i} is not an object")
        s_where = f"{where}: sentence {s_i}"
        tokens = [
            Token(
                text=_require(t, "text", str, s_where),
                pos=_require(t, "pos", str, s_where),
                head=_require(t, "head", int, s_where),
                deprel=_require(t, "deprel", str, s_where),
            )
            for t in _require(s_raw, "tokens", list, s_where)
        ]
        entities = [
            EntityMention(
                id=_require(e, "id", str, s_where),
                start=_require(e, "start", int, s_where),
                end=_require(e, "end", int, s_where),
                type=_require(e, "type", str, s_where),
            )
            for e in s_raw.get("entities", [])
        ]
        events = [
            EventMention(
                trigger_start=_require(ev, "trigger_start", int, s_where),
                trigger_end=_require(ev, "trigger_end", int, s_where),
                type=_require(ev, "type", str, s_where),
                args=[
                    Argument(
                        entity_id=_require(a, "entity_id", str, s_where),
                        role=_require(a, "role", str, s_where),
                    )
                    for a in ev.get("args", [])
                ],
            )
            for ev in s_raw.get("events", [])
        ]
        sentences.append(
            Sentence(doc_id=doc_id, index=s_i, tokens=tokens, entities=entities, events=events)
        )
    return Document(doc_id=doc_id, sentences=sentences)


def document_to_dict(doc: Document) -> dict:
    return {
        "doc_id": doc.doc_id,
        "sentences": [
            {
                "tokens": [
                    {"text": t.text, "pos": t.pos, "head": t.head, "deprel": t.deprel}
                    for t in s.tokens
                ],
                "entities": [
                    {"id": e.id, "start": e.start, "end": e.end, "type": e.type}
                    for e in s.entities
                ],
                "events": [
                    {
                        "trigger_start": ev.trigger_start,
                        "trigger_end": ev.trigger_end,
                        "type": ev.type,
                        "args": [
                            {"entity_id": a.entity_id, "role": a.role} for a in ev.args
                        ],
                    }
                    for ev in s.events
                ],
            }
            for s in doc.sentences
        ],
    }


def load_corpus(path, vocab: "LabelVocab | None" = None) -> list[Document]:
    """Read one document file or a directory of ``*.json`` document files.

    Structural validation always runs; label checks run when a vocab is
    given. Raises CorpusError with the file, position and rule on failure.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise CorpusError(f"{path}: no *.json document files")
    elif path.exists():
        files = [path]
    else:
        raise CorpusError(f"{path}: no such file or directory")
    docs = []
    for file in files:
        try:
            raw = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise CorpusError(
                f"{file}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}"
            ) from err
        if not isinstance(raw, dict):
            raise CorpusError(f"{file}: top level must be a document object")
        doc = _parse_document(raw, str(file))
        validate_document(doc, vocab)
        docs.append(doc)
    return docs


def write_corpus(docs: Sequence[Document], path) -> list[Path]:
    """Write documents as pretty JSON, one file per document.

    ``path`` is a directory (created if needed); a single document may also
    be written straight to a ``*.json`` file path. Returns written paths.
    """
    path = Path(path)
    if path.suffix == ".json":
        if len(docs) != 1:
            raise CorpusError(f"cannot write {len(docs)} documents to a single file {path}")
        path.parent.mkdir(parents=True, exist_ok=True)
        targets = [path]
    else:
        path.mkdir(parents=True, exist_ok=True)
        targets = []
        for doc in docs:
            safe = re.sub(r"[^A-Za-z0-9._-]", "_", doc.doc_id) or "doc"
            targets.append(path / f"{safe}.json")
    written = []
    for doc, target in zip(docs, targets):
        target.write_text(
            json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written.append(target)
    return written


def split_corpus(
    docs: Sequence[Document], fraction: float = 0.7, seed: int = 0
) -> tuple[list[Document], list[Document]]:
    """Document-level split: whole documents go to one side or the other."""
    if not docs:
        raise CorpusError("cannot split an empty corpus")
    if not 0.0 <= fraction <= 1.0:
        raise CorpusError(f"split fraction {fraction} outside [0, 1]")
    order = np.random.default_rng(seed).permutation(len(docs))
    n_train = int(len(docs) * fraction + 0.5)
    train_idx = sorted(order[:n_train].tolist())
    test_idx = sorted(order[n_train:].tolist())
    return [docs[i] for i in train_idx], [docs[i] for i in test_idx]


def sentences_of(docs: Iterable[Document]) -> list[Sentence]:
    return [s for d in docs for s in d.sentences]


# ---------------------------------------------------------------------------
# BIO encoding


def bio_encode(sentence: Sentence) -> list[str]:
    """Per-token BIO labels from the entity mentions.

    Longer spans are painted first, so where mentions nest the innermost one
    is what the labels show.
    """
    labels = ["O"] * len(sentence.tokens)
    order = sorted(sentence.entities, key=lambda e: (-(e.end - e.start), e.start))
    for ent in order:
        labels[ent.start - 1] = "B-" + ent.type
        for i in range(ent.start, ent.end):
            labels[i] = "I-" + ent.type
    return labels


def bio_decode(labels: Sequence[str]) -> list[tuple[int, int, str]]:
    """Recover (start, end, type) spans from BIO labels."""
    spans = []
    start, kind = None, None
    for i, label in enumerate(labels, start=1):
        if label.startswith("B-"):
            if start is not None:
                spans.append((start, i - 1, kind))
            start, kind = i, label[2:]
        elif label.startswith("I-") and start is not None and label[2:] == kind:
            continue
        elif label == "O":
            if start is not None:
                spans.append((start, i - 1, kind))
            start, kind = None, None
        else:
            raise CorpusError(f"bad BIO sequence at position {i}: {label!r}")
    if start is not None:
        spans.append((start, len(labels), kind))
    return spans


# ---------------------------------------------------------------------------
# label vocabulary

_VOCAB_FILES = {
    "event_types": "event_types.txt",
    "roles": "arg_roles.txt",
    "entity_types": "entity_types.txt",
    "pos_tags": "pos_tags.txt",
}

NONE_LABEL = "NONE"
UNK_POS = "<UNK>"


class LabelVocab:
    """Closed label sets plus an open POS vocabulary with an UNK slot.

    Class 0 is NONE for both trigger and role classification; BIO label 0 is
    O; POS id 0 is UNK (unknown tags map there instead of failing).
    """

    def __init__(
        self,
        event_types: Sequence[str],
        roles: Sequence[str],
        entity_types: Sequence[str],
        pos_tags: Sequence[str] = (),
    ):
        for name, labels in (
            ("event_types", event_types),
            ("roles", roles),
            ("entity_types", entity_types),
            ("pos_tags", pos_tags),
        ):
            if len(set(labels)) != len(tuple(labels)):
                raise CorpusError(f"duplicate labels in {name}")
            if NONE_LABEL in labels or UNK_POS in labels:
                raise CorpusError(f"{name} must not contain reserved labels")
        self.event_types = tuple(event_types)
        self.roles = tuple(roles)
        self.entity_types = tuple(entity_types)
        self.pos_tags = tuple(pos_tags)
        self.trigger_labels = (NONE_LABEL,) + self.event_types
        self.role_labels = (NONE_LABEL,) + self.roles
        bio = ["O"]
        for t in self.entity_types:
            bio += [f"B-{t}", f"I-{t}"]
        self.bio_labels = tuple(bio)
        self.pos_labels = (UNK_POS,) + self.pos_tags
        self._trigger_ids = {l: i for i, l in enumerate(self.trigger_labels)}
        self._role_ids = {l: i for i, l in enumerate(self.role_labels)}
        self._bio_ids = {l: i for i, l in enumerate(self.bio_labels)}
        self._pos_ids = {l: i for i, l in enumerate(self.pos_labels)}

    @property
    def n_trigger_classes(self) -> int:
        return len(self.trigger_labels)

    @property
    def n_role_classes(self) -> int:
        return len(self.role_labels)

    def trigger_id(self, label: str) -> int:
        try:
            return self._trigger_ids[label]
        except KeyError:
            raise CorpusError(f"unknown event type {label!r}") from None

    def role_id(self, label: str) -> int:
        try:
            return self._role_ids[label]
        except KeyError:
            raise CorpusError(f"unknown argument role {label!r}") from None

    def bio_id(self, label: str) -> int:
        """BIO label id; labels for unseen entity types map to O."""
        return self._bio_ids.get(label, 0)

    def pos_id(self, tag: str) -> int:
        return self._pos_ids.get(tag, 0)

    @classmethod
    def from_corpus(cls, docs: Iterable[Document]) -> "LabelVocab":
        """Collect sorted label sets from data (typically the train split)."""
        events, roles, entities, pos = set(), set(), set(), set()
        for doc in docs:
            for sent in doc.sentences:
                for tok in sent.tokens:
                    pos.add(tok.pos)
                for ent in sent.entities:
                    entities.add(ent.type)
                for ev in sent.events:
                    events.add(ev.type)
                    for arg in ev.args:
                        roles.add(arg.role)
        return cls(sorted(events), sorted(roles), sorted(entities), sorted(pos))

    @classmethod
    def from_files(cls, directory) -> "LabelVocab":
        """Read one-label-per-line files; pos_tags.txt is optional."""
        directory = Path(directory)
        values = {}
        for attr, filename in _VOCAB_FILES.items():
            file = directory / filename
            if not file.exists():
                if attr == "pos_tags":
                    values[attr] = ()
                    continue
                raise CorpusError(f"missing label file {file}")
            labels = [line.strip() for line in file.read_text(encoding="utf-8").splitlines()]
            values[attr] = tuple(l for l in labels if l)
        return cls(**values)

    @classmethod
    def default(cls) -> "LabelVocab":
        """The commodity-news label inventory shipped with the package."""
        def read(name):
            text = resources.files("eventgcn.data").joinpath(name).read_text("utf-8")
            return tuple(l.strip() for l in text.splitlines() if l.strip())

        return cls(
            event_types=read("event_types.txt"),
            roles=read("arg_roles.txt"),
            entity_types=read("entity_types.txt"),
        )

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for attr, filename in _VOCAB_FILES.items():
            labels = getattr(self, attr)
            (directory / filename).write_text(
                "".join(f"{l}\n" for l in labels), encoding="utf-8"
            )

    def to_dict(self) -> dict:
        return {
            "event_types": list(self.event_types),
            "roles": list(self.roles),
            "entity_types": list(self.entity_types),
            "pos_tags": list(self.pos_tags),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LabelVocab":
        return cls(
            raw["event_types"], raw["roles"], raw["entity_types"], raw.get("pos_tags", ())
        )


# ---------------------------------------------------------------------------
# CoNLL-U ingestion (tokens and trees only; no entity or event layers)


def read_conllu(path) -> Document:
    """Parse a CoNLL-U file into a Document with empty entity/event layers.

    Multiword-token ranges and empty nodes are skipped; UPOS becomes the POS
    channel. The doc_id is the file stem.
    """
    path = Path(path)
    sentences: list[Sentence] = []
    tokens: list[Token] = []

    def flush():
        nonlocal tokens
        if tokens:
            sentences.append(
                Sentence(doc_id=path.stem, index=len(sentences), tokens=tokens)
            )
            tokens = []

    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            raise CorpusError(f"{path}:{lineno}: expected >= 8 tab-separated columns")
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            head = int(cols[6])
        except ValueError:
            raise CorpusError(f"{path}:{lineno}: non-integer head {cols[6]!r}") from None
        tokens.append(Token(text=cols[1], pos=cols[3], head=head, deprel=cols[7]))
    flush()
    if not sentences:
        raise CorpusError(f"{path}: no sentences found")
    doc = Document(doc_id=path.stem, sentences=sentences)
    validate_document(doc)
    return doc
