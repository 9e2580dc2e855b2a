"""Local test checkpoints.

The sandboxed test environments cannot download hub models, so tests
build a miniature randomly initialised BERT with a hand-picked WordPiece
vocabulary. "Stockpiles" splitting into Stock + ##piles gives every
consumer a guaranteed multi-subword word to check alignment against.
"""

from pathlib import Path

import torch
from tokenizers import Tokenizer, normalizers, pre_tokenizers, processors
from tokenizers.models import WordPiece
from transformers import BertConfig, BertModel, BertTokenizerFast

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "Stock", "##piles", "soared", "by", "1", ".", "350",
    "million", "barrels", "crude", "oil", "prices", "fell",
    "to", "a", "the", "mere", "from", "in", "200", "week",
    "of", "and", "##s", "rose",
]


def build_tiny_model(
    path,
    max_positions: int = 64,
    hidden_size: int = 32,
    layers: int = 2,
    heads: int = 2,
    seed: int = 0,
) -> Path:
    """Write a loadable cased BERT checkpoint + fast tokenizer to ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    vocab = {piece: index for index, piece in enumerate(VOCAB)}
    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=False)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.BertProcessing(
        sep=("[SEP]", vocab["[SEP]"]), cls=("[CLS]", vocab["[CLS]"])
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]", do_lower_case=False,
    )
    tokenizer.save_pretrained(str(path))

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=max_positions,
    )
    BertModel(config).save_pretrained(str(path))
    return path
