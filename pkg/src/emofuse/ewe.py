"""Pretrained emotion-enriched word embeddings and the CNN essay feature.

The embedding table covers the corpus vocabulary: words present in the
pretrained file keep their 300-dim vector, everything else is zero. Row 0
is reserved for padding and out-of-vocabulary lookups. An essay becomes a
fixed (max_len, 300) matrix which a two-stage Conv1d/MaxPool1d branch
reduces to a 16-dim feature vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch
from torch import nn

logger = logging.getLogger(__name__)

EMBEDDING_DIM = 300


class EmbeddingMatrix:
    """Vocabulary-indexed table of pretrained word vectors.

    Row 0 is the all-zero padding row; out-of-vocabulary lookups resolve
    to it.
    """

    def __init__(self, vocab: dict[str, int], table: np.ndarray):
        if table.ndim != 2:
            raise ValueError(f"embedding table must be 2-d, got shape {table.shape}")
        if table.shape[0] != len(vocab) + 1:
            raise ValueError(
                f"table has {table.shape[0]} rows for {len(vocab)} words plus padding"
            )
        if np.any(table[0] != 0):
            raise ValueError("padding row 0 must be all-zero")
        self.vocab = vocab
        self.table = table

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def row_index(self, word: str) -> int:
        return self.vocab.get(word, 0)

    def vector(self, word: str) -> np.ndarray:
        return self.table[self.row_index(word)]


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def _read_embedding_file(path: Path, wanted: set[str], dim: int) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split(" ")
            if lineno == 1 and len(parts) == 2 and all(_is_int(x) for x in parts):
                continue  # count/dim header
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected a word plus {dim} values, got {len(parts)} fields"
                )
            word = parts[0]
            if word not in wanted:
                continue
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float32)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric embedding value") from None
            if word in out:
                logger.warning(
                    "duplicate embedding for %r at %s:%d; keeping the last occurrence",
                    word, path, lineno,
                )
            out[word] = vec
    return out


def build_matrix(
    token_sequences: Iterable[Sequence[str]],
    embedding_path: str | Path,
    dim: int = EMBEDDING_DIM,
) -> EmbeddingMatrix:
    """Build the corpus-vocabulary embedding table from a pretrained file.

    The vocabulary is the union of tokens across ``token_sequences``
    (sorted, so row order is deterministic). File rows are a word
    followed by ``dim`` reals, single-space separated, with an optional
    leading count/dim header. Corpus words missing from the file get the
    zero vector.
    """
    p = Path(embedding_path)
    if not p.is_file():
        raise FileNotFoundError(f"embedding file not found: {p}")
    vocab_words = sorted({tok for seq in token_sequences for tok in seq})
    vectors = _read_embedding_file(p, set(vocab_words), dim)
    vocab = {word: i + 1 for i, word in enumerate(vocab_words)}
    table = np.zeros((len(vocab_words) + 1, dim), dtype=np.float32)
    for word, vec in vectors.items():
        table[vocab[word]] = vec
    return EmbeddingMatrix(vocab, table)


def token_indices(tokens: Sequence[str], emb: EmbeddingMatrix, max_len: int = 100) -> np.ndarray:
    """Embedding row index per token, zero-padded to ``max_len``."""
    toks = list(tokens)
    if len(toks) > max_len:
        raise ValueError(f"token sequence of length {len(toks)} exceeds max_len={max_len}")
    idx = np.zeros(max_len, dtype=np.int64)
    for i, tok in enumerate(toks):
        idx[i] = emb.row_index(tok)
    return idx


def essay_to_matrix(tokens: Sequence[str], emb: EmbeddingMatrix, max_len: int = 100) -> np.ndarray:
    """Stack per-token embedding rows into a fixed (max_len, dim) matrix.

    Rows past the token count stay zero.
    """
    return emb.table[token_indices(tokens, emb, max_len)]


@dataclass
class CnnConfig:
    """Hyperparameters of the convolutional branch.

    Defaults reduce a 100-token essay to a 16-dim feature: two
    Conv1d/Tanh/MaxPool1d stages followed by a global max over the
    remaining positions, so the output width equals ``channels2``.
    """

    channels1: int = 64
    channels2: int = 16
    kernel1: int = 5
    kernel2: int = 5
    pool1: int = 2
    pool2: int = 2
    freeze_embeddings: bool = True

    def __post_init__(self):
        for name in ("channels1", "channels2", "kernel1", "kernel2", "pool1", "pool2"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"cnn.{name} must be a positive integer, got {value!r}")

    @property
    def out_dim(self) -> int:
        return self.channels2

    def output_positions(self, length: int) -> int:
        """Positions left after both conv/pool stages for an input of ``length``."""
        length = length - self.kernel1 + 1
        length = length // self.pool1
        length = length - self.kernel2 + 1
        return length // self.pool2


class CnnBranch(nn.Module):
    """Two Conv1d/Tanh/MaxPool1d stages plus a global max over positions."""

    def __init__(self, cfg: CnnConfig | None = None, input_dim: int = EMBEDDING_DIM):
        super().__init__()
        self.cfg = cfg or CnnConfig()
        self.input_dim = input_dim
        self.conv1 = nn.Conv1d(input_dim, self.cfg.channels1, self.cfg.kernel1)
        self.pool1 = nn.MaxPool1d(self.cfg.pool1)
        self.conv2 = nn.Conv1d(self.cfg.channels1, self.cfg.channels2, self.cfg.kernel2)
        self.pool2 = nn.MaxPool1d(self.cfg.pool2)
        self.activation = nn.Tanh()

    @property
    def out_dim(self) -> int:
        return self.cfg.out_dim

    def forward(self, essays: torch.Tensor) -> torch.Tensor:
        """Map (batch, positions, dim) or (positions, dim) to the feature vector."""
        single = essays.dim() == 2
        if single:
            essays = essays.unsqueeze(0)
        if essays.dim() != 3 or essays.shape[-1] != self.input_dim:
            raise ValueError(
                f"expected input shaped (..., positions, {self.input_dim}), got {tuple(essays.shape)}"
            )
        if self.cfg.output_positions(essays.shape[1]) < 1:
            raise ValueError(
                f"{essays.shape[1]} positions is too short for kernels "
                f"({self.cfg.kernel1}, {self.cfg.kernel2}) and pools "
                f"({self.cfg.pool1}, {self.cfg.pool2})"
            )
        x = essays.transpose(1, 2)  # channels = embedding dim, length = positions
        x = self.pool1(self.activation(self.conv1(x)))
        x = self.pool2(self.activation(self.conv2(x)))
        feat = x.max(dim=2).values
        return feat.squeeze(0) if single else feat
