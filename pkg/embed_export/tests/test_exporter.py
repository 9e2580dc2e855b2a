import numpy as np
import pytest
import torch
from transformers import AutoModel, AutoTokenizer

from embed_export import (
    ExportError,
    export_corpus,
    subword_alignment,
    window_spans,
)
from eventgcn.corpus import Document, Sentence, Token, write_corpus
from eventgcn.embeddings import ContextualVectorStore


def make_sentence(words, doc_id="d1", index=0):
    tokens = [Token(text=w, pos="X", head=i, deprel="dep") for i, w in enumerate(words)]
    return Sentence(doc_id=doc_id, index=index, tokens=tokens, entities=[], events=[])


def write_docs(path, sentences_by_doc):
    docs = [
        Document(doc_id, [make_sentence(w, doc_id, i) for i, w in enumerate(sentence_words)])
        for doc_id, sentence_words in sentences_by_doc.items()
    ]
    write_corpus(docs, path)
    return [s for d in docs for s in d.sentences]


WORDS_A = ["Stockpiles", "soared", "by", "1.350", "million", "barrels", "."]
WORDS_B = ["crude", "oil", "prices", "fell", "in", "the", "week", "."]


def run_hidden_states(model_dir, words, layer=-1):
    """Recompute per-subword vectors straight through transformers."""
    tokenizer = AutoTokenizer.from_pretrained(str(model_dir))
    model = AutoModel.from_pretrained(str(model_dir))
    model.eval()
    encoding = tokenizer(words, is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        outputs = model(**encoding, output_hidden_states=True)
    hidden = outputs.hidden_states[layer][0].numpy()
    word_ids = encoding.word_ids(0)
    groups = {}
    for pos, wid in enumerate(word_ids):
        if wid is not None:
            groups.setdefault(wid, []).append(pos)
    return hidden, groups


class TestRoundTrip:
    def test_two_sentence_corpus_loads_in_primary(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [WORDS_A], "d2": [WORDS_B]})
        out = tmp_path / "vectors.ctxv"
        summary = export_corpus(corpus, tiny_model, out)
        assert summary.sentences == 2
        assert summary.tokens == len(WORDS_A) + len(WORDS_B)
        assert summary.dim == 32

        store = ContextualVectorStore.load(out, sentences=sents)
        assert store.dim == 32
        store.check_coverage(sents)
        for sent, words in zip(sents, (WORDS_A, WORDS_B)):
            assert store.vectors(sent).shape == (len(words), 32)

    def test_reload_is_float32_exact(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [WORDS_A]})
        out = tmp_path / "v.ctxv"
        export_corpus(corpus, tiny_model, out)
        loaded = ContextualVectorStore.load(out).vectors(sents[0])
        assert loaded.dtype == np.float64
        assert np.array_equal(loaded, loaded.astype(np.float32).astype(np.float64))

    def test_deterministic_bytes(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        write_docs(corpus, {"d1": [WORDS_A, WORDS_B]})
        a, b = tmp_path / "a.ctxv", tmp_path / "b.ctxv"
        export_corpus(corpus, tiny_model, a)
        export_corpus(corpus, tiny_model, b)
        assert a.read_bytes() == b.read_bytes()


class TestAlignment:
    def test_single_subword_row_is_raw_hidden_state(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [WORDS_A]})
        out = tmp_path / "v.ctxv"
        export_corpus(corpus, tiny_model, out, batch_size=1)
        rows = ContextualVectorStore.load(out).vectors(sents[0])

        hidden, groups = run_hidden_states(tiny_model, WORDS_A)
        soared = WORDS_A.index("soared")
        assert len(groups[soared]) == 1
        raw = hidden[groups[soared][0]].astype(np.float32)
        assert np.array_equal(rows[soared].astype(np.float32), raw)

    def test_multi_subword_row_is_subword_mean(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [WORDS_A]})
        out = tmp_path / "v.ctxv"
        export_corpus(corpus, tiny_model, out)
        rows = ContextualVectorStore.load(out).vectors(sents[0])

        hidden, groups = run_hidden_states(tiny_model, WORDS_A)
        split = [w for w, g in groups.items() if len(g) > 1]
        assert split, "fixture vocabulary must split at least one word"
        for wid in split:
            want = hidden[groups[wid]].mean(axis=0)
            assert np.max(np.abs(rows[wid] - want)) < 1e-6, WORDS_A[wid]

    def test_conservation_over_mixed_vocabulary(self, tiny_model):
        tokenizer = AutoTokenizer.from_pretrained(str(tiny_model))
        cases = [
            WORDS_A,
            WORDS_B,
            ["totally", "unknown", "words", "everywhere"],
            ["Stockpiles", "Stockpiles", "1.350", "2.7%", "a"],
        ]
        for words in cases:
            ids, groups = subword_alignment(tokenizer, words)
            flat = [p for g in groups for p in g]
            assert sorted(flat) == list(range(len(ids)))
            assert len(groups) == len(words)

    def test_unalignable_token_names_sentence(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        write_docs(corpus, {"doc-9": [["oil", "​", "fell"]]})
        with pytest.raises(ExportError, match=r"doc-9\[0\].*produce no subwords"):
            export_corpus(corpus, tiny_model, tmp_path / "v.ctxv")


class TestWindows:
    def test_window_spans_cover_and_overlap(self):
        for n, core, overlap in [(5, 10, 4), (22, 10, 4), (30, 10, 9), (11, 10, 0), (37, 12, 64)]:
            spans = window_spans(n, core, overlap)
            covered = set()
            for start, end in spans:
                assert 0 <= start < end <= n
                assert end - start <= core
                covered.update(range(start, end))
            assert covered == set(range(n))
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert s2 > s1
                assert e1 - s2 >= min(overlap, core - 1) or e2 == n

    def test_windowed_export_matches_manual_averaging(self, narrow_model, tmp_path):
        words = (["crude", "oil", "prices", "fell", "in", "the", "week", "."] * 3)[:20]
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [words]})
        out = tmp_path / "v.ctxv"
        export_corpus(corpus, narrow_model, out, overlap=4, batch_size=1)
        rows = ContextualVectorStore.load(out).vectors(sents[0])
        assert rows.shape == (20, 32)

        tokenizer = AutoTokenizer.from_pretrained(str(narrow_model))
        model = AutoModel.from_pretrained(str(narrow_model))
        model.eval()
        ids, groups = subword_alignment(tokenizer, words)
        core = model.config.max_position_embeddings - 2
        spans = window_spans(len(ids), core, 4)
        assert len(spans) > 1, "sentence must actually overflow the position budget"
        sums = np.zeros((len(ids), 32))
        hits = np.zeros(len(ids))
        for start, end in spans:
            window = [tokenizer.cls_token_id] + ids[start:end] + [tokenizer.sep_token_id]
            with torch.no_grad():
                hidden = model(
                    input_ids=torch.tensor([window]), output_hidden_states=True
                ).hidden_states[-1][0].numpy()
            sums[start:end] += hidden[1 : 1 + end - start]
            hits[start:end] += 1
        subword_vecs = sums / hits[:, None]
        for wid, positions in enumerate(groups):
            want = subword_vecs[positions].mean(axis=0)
            assert np.max(np.abs(rows[wid] - want)) < 1e-6


class TestConfiguration:
    def test_layer_selection_changes_output(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        sents = write_docs(corpus, {"d1": [WORDS_A]})
        last = tmp_path / "last.ctxv"
        embeddings = tmp_path / "embeddings.ctxv"
        export_corpus(corpus, tiny_model, last)
        export_corpus(corpus, tiny_model, embeddings, layer=0)
        a = ContextualVectorStore.load(last).vectors(sents[0])
        b = ContextualVectorStore.load(embeddings).vectors(sents[0])
        assert a.shape == b.shape
        assert not np.array_equal(a, b)

    def test_layer_out_of_range(self, tiny_model, tmp_path):
        corpus = tmp_path / "corpus"
        write_docs(corpus, {"d1": [WORDS_A]})
        with pytest.raises(ExportError, match="out of range"):
            export_corpus(corpus, tiny_model, tmp_path / "v.ctxv", layer=7)

    def test_bad_job_parameters(self, tiny_model, tmp_path):
        with pytest.raises(ExportError, match="batch_size"):
            export_corpus("x", tiny_model, "y", batch_size=0)
        with pytest.raises(ExportError, match="overlap"):
            export_corpus("x", tiny_model, "y", overlap=-1)

    def test_missing_checkpoint(self, tmp_path):
        corpus = tmp_path / "corpus"
        write_docs(corpus, {"d1": [WORDS_A]})
        with pytest.raises(ExportError, match="cannot load checkpoint"):
            export_corpus(corpus, tmp_path / "nowhere", tmp_path / "v.ctxv")
