"""Word vector providers feeding the token encoder.

Three interchangeable sources expose the same surface: a ``dim``
attribute and ``vectors(sentence)`` returning one float64 row per
token. ``RandomTable`` hashes each word to a deterministic random
vector, ``StaticTable`` reads a text file of pretrained vectors, and
``ContextualVectorStore`` serves precomputed sentence-level vectors
from a binary file keyed by document id and sentence index.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .corpus import Sentence

MAGIC = b"CTXV"
VERSION = 1


class EmbeddingError(Exception):
    """Raised for malformed vector files or lookup misses."""


class VectorProvider(Protocol):
    dim: int

    def vectors(self, sentence: Sentence) -> np.ndarray: ...


def _word_seed(word: str) -> int:
    digest = zlib.crc32(word.encode("utf-8"))
    return digest & 0x7FFFFFFF


@dataclass
class RandomTable:
    """Deterministic pseudo-random vectors, one per distinct word.

    Each word's vector is drawn from a generator seeded by a hash of
    the word itself, so the same word maps to the same vector across
    runs and processes without storing a table.
    """

    dim: int = 32
    scale: float = 0.1
    _cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def lookup(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            rng = np.random.default_rng(_word_seed(word))
            vec = rng.standard_normal(self.dim) * self.scale
            self._cache[word] = vec
        return vec

    def vectors(self, sentence: Sentence) -> np.ndarray:
        return np.stack([self.lookup(t.text) for t in sentence.tokens])


class StaticTable:
    """Pretrained vectors from whitespace-separated text (word v1 ... vd).

    Out-of-vocabulary words fall back to the mean of all loaded
    vectors. Lookup is case-sensitive first, lowercase second.
    """

    def __init__(self, table: dict[str, np.ndarray], dim: int):
        self.table = table
        self.dim = dim
        if table:
            self.unk = np.mean(list(table.values()), axis=0)
        else:
            self.unk = np.zeros(dim)

    @classmethod
    def load(cls, path: str | Path) -> "StaticTable":
        path = Path(path)
        if not path.is_file():
            raise EmbeddingError(f"no such vector file: {path}")
        table: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split(" ")
                if len(parts) < 2:
                    raise EmbeddingError(f"{path}:{lineno}: not a vector line")
                word = parts[0]
                try:
                    vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
                except ValueError as exc:
                    raise EmbeddingError(f"{path}:{lineno}: {exc}") from None
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise EmbeddingError(
                        f"{path}:{lineno}: expected {dim} components, got {vec.shape[0]}"
                    )
                table[word] = vec
        if dim is None:
            raise EmbeddingError(f"{path}: empty vector file")
        return cls(table, dim)

    def lookup(self, word: str) -> np.ndarray:
        vec = self.table.get(word)
        if vec is None:
            vec = self.table.get(word.lower())
        if vec is None:
            vec = self.unk
        return vec

    def vectors(self, sentence: Sentence) -> np.ndarray:
        return np.stack([self.lookup(t.text) for t in sentence.tokens])


def write_contextual(
    path: str | Path,
    records: dict[tuple[str, int], np.ndarray],
    dim: int,
) -> None:
    """Serialize sentence vectors; records map (doc_id, sent_index) to (n, dim)."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, dim))
        for (doc_id, sent_index), mat in records.items():
            mat = np.asarray(mat, dtype="<f4")
            if mat.ndim != 2 or mat.shape[1] != dim:
                raise EmbeddingError(
                    f"record {doc_id}/{sent_index}: shape {mat.shape} does not match dim {dim}"
                )
            key = doc_id.encode("utf-8")
            head = struct.pack("<I", len(key)) + key
            head += struct.pack("<II", sent_index, mat.shape[0])
            body = mat.tobytes()
            crc = zlib.crc32(key + struct.pack("<II", sent_index, mat.shape[0]) + body)
            fh.write(head)
            fh.write(body)
            fh.write(struct.pack("<I", crc))


class ContextualVectorStore:
    """Precomputed per-sentence vectors loaded from a binary file.

    Every sentence the model sees must have a record whose row count
    matches the sentence length; a vector request for a missing key
    raises so silent mismatches between corpus and vector file cannot
    slip through.
    """

    def __init__(self, records: dict[tuple[str, int], np.ndarray], dim: int):
        self.records = records
        self.dim = dim

    @classmethod
    def load(
        cls, path: str | Path, sentences: list[Sentence] | None = None
    ) -> "ContextualVectorStore":
        path = Path(path)
        if not path.is_file():
            raise EmbeddingError(f"no such vector file: {path}")
        blob = path.read_bytes()
        if blob[:4] != MAGIC:
            raise EmbeddingError(f"{path}: bad magic {blob[:4]!r}")
        if len(blob) < 12:
            raise EmbeddingError(f"{path}: truncated header")
        version, dim = struct.unpack_from("<II", blob, 4)
        if version != VERSION:
            raise EmbeddingError(f"{path}: unsupported version {version}")
        pos = 12
        records: dict[tuple[str, int], np.ndarray] = {}
        while pos < len(blob):
            try:
                (key_len,) = struct.unpack_from("<I", blob, pos)
                key = blob[pos + 4 : pos + 4 + key_len].decode("utf-8")
                base = pos + 4 + key_len
                sent_index, n = struct.unpack_from("<II", blob, base)
                body_start = base + 8
                body_end = body_start + n * dim * 4
                body = blob[body_start:body_end]
                if len(body) != n * dim * 4:
                    raise struct.error("short body")
                (crc,) = struct.unpack_from("<I", blob, body_end)
            except (struct.error, UnicodeDecodeError) as exc:
                raise EmbeddingError(f"{path}: truncated record at byte {pos}: {exc}") from None
            expect = zlib.crc32(
                blob[pos + 4 : pos + 4 + key_len]
                + struct.pack("<II", sent_index, n)
                + body
            )
            if crc != expect:
                raise EmbeddingError(
                    f"{path}: checksum mismatch for record {key!r}/{sent_index}"
                )
            mat = np.frombuffer(body, dtype="<f4").reshape(n, dim).astype(np.float64)
            records[(key, sent_index)] = mat
            pos = body_end + 4
        store = cls(records, dim)
        if sentences is not None:
            store.check_coverage(sentences)
        return store

    def check_coverage(self, sentences: list[Sentence]) -> None:
        for sent in sentences:
            key = (sent.doc_id, sent.index)
            mat = self.records.get(key)
            if mat is None:
                raise EmbeddingError(f"no vectors for sentence {key[0]}/{key[1]}")
            if mat.shape[0] != len(sent.tokens):
                raise EmbeddingError(
                    f"sentence {key[0]}/{key[1]}: {len(sent.tokens)} tokens "
                    f"but {mat.shape[0]} vector rows"
                )

    def vectors(self, sentence: Sentence) -> np.ndarray:
        key = (sentence.doc_id, sentence.index)
        mat = self.records.get(key)
        if mat is None:
            raise EmbeddingError(f"no vectors for sentence {key[0]}/{key[1]}")
        if mat.shape[0] != len(sentence.tokens):
            raise EmbeddingError(
                f"sentence {key[0]}/{key[1]}: {len(sentence.tokens)} tokens "
                f"but {mat.shape[0]} vector rows"
            )
        return mat
