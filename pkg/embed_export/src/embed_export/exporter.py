"""Per-token contextual vectors from a transformer checkpoint.

Writes the extractor's binary vector format: one record per corpus
sentence, one row per corpus token. The checkpoint's own tokenizer
re-tokenizes each word into subword pieces; [CLS]/[SEP] rows are dropped
and the pieces of one corpus token are averaged, so row counts always
match the corpus tokenization no matter how the vocabularies disagree.

Sentences longer than the encoder's position budget are run through a
sliding window and averaged where windows overlap. Inference runs in eval
mode under no_grad, so output is deterministic for a fixed checkpoint,
corpus and batch size.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from eventgcn.corpus import Sentence, load_corpus, sentences_of
from eventgcn.embeddings import write_contextual


class ExportError(RuntimeError):
    """Checkpoint, alignment, or configuration failure during export."""


@dataclass(frozen=True)
class ExportJob:
    """One export run.

    ``model`` is a local checkpoint directory (or any identifier the
    transformers loaders accept). ``layer`` indexes the hidden-state
    stack: 0 is the embedding output, -1 (default) the last encoder
    layer. ``overlap`` is the number of subwords shared by consecutive
    windows when a sentence exceeds the encoder's position budget.
    """

    corpus: str | Path
    model: str | Path
    out: str | Path
    layer: int = -1
    batch_size: int = 8
    overlap: int = 64
    device: str = "cpu"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExportError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.overlap < 0:
            raise ExportError(f"overlap must be >= 0, got {self.overlap}")


@dataclass(frozen=True)
class ExportSummary:
    sentences: int
    tokens: int
    dim: int
    path: Path


def subword_alignment(tokenizer, words: list[str]) -> tuple[list[int], list[list[int]]]:
    """Subword ids plus, per word, the positions of its pieces.

    Every subword belongs to exactly one word (no specials are added), so
    the groups partition range(len(ids)). A word whose text vanishes under
    the tokenizer's normalizer has no pieces; callers turn that into an
    error naming the sentence.
    """
    encoding = tokenizer(words, is_split_into_words=True, add_special_tokens=False)
    ids = list(encoding["input_ids"])
    groups: list[list[int]] = [[] for _ in words]
    for pos, word_index in enumerate(encoding.word_ids(0)):
        groups[word_index].append(pos)
    return ids, groups


def window_spans(n: int, core: int, overlap: int) -> list[tuple[int, int]]:
    """Half-open spans of at most ``core`` positions covering range(n).

    Consecutive spans share ``overlap`` positions (the final span may
    share more). overlap is clamped below core so the walk advances.
    """
    if core < 1:
        raise ExportError(f"window size must be >= 1, got {core}")
    if n <= core:
        return [(0, max(n, 0))]
    step = core - min(overlap, core - 1)
    spans = []
    start = 0
    while True:
        end = min(n, start + core)
        spans.append((start, end))
        if end == n:
            return spans
        start += step


def _load_checkpoint(job: ExportJob):
    try:
        tokenizer = AutoTokenizer.from_pretrained(str(job.model), use_fast=True)
        model = AutoModel.from_pretrained(str(job.model))
    except (OSError, ValueError) as exc:
        raise ExportError(f"cannot load checkpoint {job.model}: {exc}") from exc
    if not getattr(tokenizer, "is_fast", False):
        raise ExportError(
            f"checkpoint {job.model} has no fast tokenizer; "
            "subword alignment needs one"
        )
    model.to(job.device)
    model.eval()
    return tokenizer, model


def _hidden_layer(outputs, layer: int, model_name) -> torch.Tensor:
    stack = outputs.hidden_states
    if not -len(stack) <= layer < len(stack):
        raise ExportError(
            f"layer {layer} out of range for {model_name}: "
            f"hidden-state stack has {len(stack)} entries"
        )
    return stack[layer]


def _sentence_rows(subword_vecs: np.ndarray, groups: list[list[int]], dim: int) -> np.ndarray:
    rows = np.empty((len(groups), dim), dtype=np.float64)
    for word_index, positions in enumerate(groups):
        rows[word_index] = subword_vecs[positions].mean(axis=0)
    return rows


def export(job: ExportJob) -> ExportSummary:
    """Run the job and write the vector file.

    Per sentence: n rows where n is the corpus token count, each row the
    mean of the token's subword vectors from the selected hidden layer,
    [CLS]/[SEP] excluded. Raises ExportError naming the sentence when a
    corpus token cannot be aligned to any subword.
    """
    tokenizer, model = _load_checkpoint(job)
    dim = int(model.config.hidden_size)
    core = int(getattr(model.config, "max_position_embeddings", 512)) - 2
    if core < 1:
        raise ExportError(f"checkpoint {job.model} leaves no room for content tokens")
    cls_id = tokenizer.cls_token_id
    sep_id = tokenizer.sep_token_id
    pad_id = tokenizer.pad_token_id or 0

    sentences = sentences_of(load_corpus(job.corpus))
    aligned: list[tuple[Sentence, list[int], list[list[int]]]] = []
    for sent in sentences:
        words = list(sent.texts)
        ids, groups = subword_alignment(tokenizer, words)
        empty = [words[i] for i, g in enumerate(groups) if not g]
        if empty:
            raise ExportError(
                f"cannot align sentence {sent.doc_id}[{sent.index}]: "
                f"token(s) {empty!r} produce no subwords"
            )
        aligned.append((sent, ids, groups))

    # (sentence slot, window start, window ids incl. specials)
    tasks: list[tuple[int, int, list[int]]] = []
    for slot, (_, ids, _) in enumerate(aligned):
        for start, end in window_spans(len(ids), core, job.overlap):
            tasks.append((slot, start, [cls_id] + ids[start:end] + [sep_id]))

    sums = [np.zeros((len(ids), dim)) for _, ids, _ in aligned]
    hits = [np.zeros(len(ids)) for _, ids, _ in aligned]
    for at in range(0, len(tasks), job.batch_size):
        chunk = tasks[at : at + job.batch_size]
        width = max(len(ids) for _, _, ids in chunk)
        input_ids = torch.full((len(chunk), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(chunk), width), dtype=torch.long)
        for row, (_, _, ids) in enumerate(chunk):
            input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[row, : len(ids)] = 1
        with torch.no_grad():
            outputs = model(
                input_ids=input_ids.to(job.device),
                attention_mask=mask.to(job.device),
                output_hidden_states=True,
            )
        hidden = _hidden_layer(outputs, job.layer, job.model).cpu().numpy()
        for row, (slot, start, ids) in enumerate(chunk):
            span = len(ids) - 2
            sums[slot][start : start + span] += hidden[row, 1 : 1 + span].astype(np.float64)
            hits[slot][start : start + span] += 1

    records = {}
    total_tokens = 0
    for slot, (sent, _, groups) in enumerate(aligned):
        subword_vecs = sums[slot] / hits[slot][:, None]
        records[(sent.doc_id, sent.index)] = _sentence_rows(subword_vecs, groups, dim)
        total_tokens += len(groups)

    out = Path(job.out)
    write_contextual(out, records, dim)
    return ExportSummary(sentences=len(aligned), tokens=total_tokens, dim=dim, path=out)


def export_corpus(corpus, model, out, **options) -> ExportSummary:
    """Convenience wrapper building an ExportJob from paths."""
    return export(ExportJob(corpus=corpus, model=model, out=out, **options))
