"""Classifier variants and batch featurization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from . import fusion
from .corpus import DatasetSplit
from .encoder import ClsEncoder, ProjectionHead
from .ewe import CnnBranch, CnnConfig, EmbeddingMatrix, token_indices
from .nrc import NRC_DIM, NrcLexicon, batch_score
from .preprocess import clean_text, preprocess_text

VARIANTS = ("vanilla", "roberta_ewe", "roberta_nrc_ewe")


def fused_dim(variant: str, projection_dim: int, cnn_dim: int = 16, nrc_dim: int = NRC_DIM) -> int:
    """Width of the classifier head input for a given variant."""
    if variant == "vanilla":
        return projection_dim
    if variant == "roberta_ewe":
        return projection_dim + cnn_dim
    if variant == "roberta_nrc_ewe":
        return projection_dim + cnn_dim + nrc_dim
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


class HybridEmotionClassifier(nn.Module):
    """Essay classifier over fused branch features.

    ``vanilla`` uses the projected CLS feature alone, ``roberta_ewe``
    appends the CNN feature over pretrained word embeddings, and
    ``roberta_nrc_ewe`` additionally appends the raw lexicon intensity
    vector. The head is a single linear layer; training applies
    cross-entropy to its logits.
    """

    def __init__(
        self,
        encoder: ClsEncoder,
        n_classes: int,
        variant: str = "roberta_nrc_ewe",
        embedding_matrix: EmbeddingMatrix | None = None,
        cnn_config: CnnConfig | None = None,
    ):
        super().__init__()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        self.variant = variant
        self.encoder = encoder
        self.projection = ProjectionHead(
            encoder.hidden_size, encoder.cfg.projection_dim, encoder.cfg.dropout_p
        )
        if self.uses_ewe:
            if embedding_matrix is None:
                raise ValueError(f"variant {variant!r} needs an embedding matrix")
            cfg = cnn_config or CnnConfig()
            # padding_idx pins row 0 to zero even when embeddings are trainable
            self.embedding = nn.Embedding.from_pretrained(
                torch.from_numpy(embedding_matrix.table.copy()),
                freeze=cfg.freeze_embeddings,
                padding_idx=0,
            )
            self.cnn = CnnBranch(cfg, input_dim=embedding_matrix.dim)
            cnn_dim = self.cnn.out_dim
        else:
            self.embedding = None
            self.cnn = None
            cnn_dim = 0
        self.head = fusion.ClassifierHead(
            fused_dim(variant, self.projection.out_dim, cnn_dim), n_classes
        )

    @property
    def uses_ewe(self) -> bool:
        return self.variant in ("roberta_ewe", "roberta_nrc_ewe")

    @property
    def uses_nrc(self) -> bool:
        return self.variant == "roberta_nrc_ewe"

    def features(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        token_idx: torch.Tensor | None = None,
        nrc: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """Fused feature block for a batch, ordered [cls; cnn; lexicon]."""
        r = self.projection(self.encoder(input_ids, attention_mask))
        if not self.uses_ewe:
            return r
        if token_idx is None:
            raise ValueError(f"variant {self.variant!r} requires token indices")
        c = self.cnn(self.embedding(token_idx))
        if not self.uses_nrc:
            return torch.cat([r, c], dim=-1)
        if nrc is None:
            raise ValueError(f"variant {self.variant!r} requires lexicon vectors")
        return fusion.fuse(fusion.FeatureBundle(r=r, c=c, n=nrc), cnn_dim=self.cnn.out_dim)

    def forward(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        token_idx: torch.Tensor | None = None,
        nrc: torch.Tensor | None = None,
    ) -> torch.Tensor:
        return self.head(self.features(input_ids, attention_mask, token_idx, nrc))


@dataclass
class FeaturizedSplit:
    """Model-ready tensors for one split, in corpus order."""

    ids: list[str]
    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    token_idx: torch.Tensor | None
    nrc: torch.Tensor | None
    labels: torch.Tensor | None

    def __len__(self) -> int:
        return len(self.ids)

    def batch(self, index: torch.Tensor, device: str | torch.device = "cpu") -> dict:
        """Model kwargs for the rows selected by ``index``."""
        out = {
            "input_ids": self.input_ids[index].to(device),
            "attention_mask": self.attention_mask[index].to(device),
        }
        if self.token_idx is not None:
            out["token_idx"] = self.token_idx[index].to(device)
        if self.nrc is not None:
            out["nrc"] = self.nrc[index].to(device)
        return out

    def batch_labels(self, index: torch.Tensor, device: str | torch.device = "cpu") -> torch.Tensor:
        if self.labels is None:
            raise ValueError("split has no gold labels")
        return self.labels[index].to(device)


def featurize_split(
    split: DatasetSplit,
    encoder: ClsEncoder,
    *,
    stops: frozenset[str] | None = None,
    max_tokens: int = 100,
    embedding_matrix: EmbeddingMatrix | None = None,
    lexicon: NrcLexicon | None = None,
    encoder_on_filtered: bool = True,
) -> FeaturizedSplit:
    """Preprocess and tensorize every essay of ``split``.

    ``embedding_matrix`` and ``lexicon`` may be omitted when the target
    variant does not consume them; the matching tensors are then None.
    With ``encoder_on_filtered`` the transformer sees the stopword
    filtered text, otherwise the merely cleaned text.
    """
    sequences = [preprocess_text(e.raw_text, stops, max_tokens) for e in split.essays]
    if encoder_on_filtered:
        texts = [" ".join(seq.tokens) for seq in sequences]
    else:
        texts = [clean_text(e.raw_text) for e in split.essays]
    input_ids, attention_mask = encoder.tokenize(texts)

    token_idx = None
    if embedding_matrix is not None:
        if sequences:
            rows = np.stack([token_indices(seq.tokens, embedding_matrix, max_tokens) for seq in sequences])
        else:
            rows = np.zeros((0, max_tokens), dtype=np.int64)
        token_idx = torch.from_numpy(rows)

    nrc_vectors = None
    if lexicon is not None:
        nrc_vectors = torch.from_numpy(batch_score(sequences, lexicon).astype(np.float32))

    gold = [e.gold_label for e in split.essays]
    if all(g is not None for g in gold) and gold:
        labels = torch.tensor(gold, dtype=torch.long)
    elif all(g is None for g in gold):
        labels = None
    else:
        raise ValueError(f"split {split.name!r} mixes labeled and unlabeled essays")

    return FeaturizedSplit(
        ids=[e.id for e in split.essays],
        input_ids=input_ids,
        attention_mask=attention_mask,
        token_idx=token_idx,
        nrc=nrc_vectors,
        labels=labels,
    )
