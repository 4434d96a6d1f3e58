"""Transformer sentence encoder: CLS feature extraction plus projection."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

OFFLINE_ENV = "EMOFUSE_OFFLINE"


@dataclass
class EncoderConfig:
    """Checkpoint and projection settings for the sentence encoder."""

    checkpoint: str = "roberta-base"
    local_path: str | None = None
    max_subword_len: int = 100
    dropout_p: float = 0.2
    projection_dim: int = 768
    freeze_encoder: bool = False

    def __post_init__(self):
        if self.max_subword_len < 2:
            raise ValueError("max_subword_len must be at least 2 (room for start/end markers)")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must lie in [0, 1), got {self.dropout_p}")
        if self.projection_dim < 1:
            raise ValueError(f"projection_dim must be positive, got {self.projection_dim}")


def offline_mode() -> bool:
    return os.environ.get(OFFLINE_ENV, "").strip().lower() not in ("", "0", "false")


def resolve_checkpoint(cfg: EncoderConfig) -> str:
    """Pick the checkpoint source: explicit local path, else the configured name.

    In offline mode (``EMOFUSE_OFFLINE`` set) the resolved source must be
    an existing directory so no download is ever attempted.
    """
    if cfg.local_path:
        p = Path(cfg.local_path)
        if not p.is_dir():
            raise FileNotFoundError(f"encoder local_path does not exist: {p}")
        return str(p)
    if offline_mode() and not Path(cfg.checkpoint).is_dir():
        raise FileNotFoundError(
            f"offline mode is set but {cfg.checkpoint!r} is not a local directory; "
            "set encoder.local_path to a saved checkpoint"
        )
    return cfg.checkpoint


class ClsEncoder(nn.Module):
    """Pretrained transformer whose feature is the first-position (CLS)
    vector of the final hidden layer.

    With ``freeze_encoder`` the transformer takes no gradients and stays
    in eval mode even while the surrounding model trains, so frozen
    features are deterministic.
    """

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        from transformers import AutoModel, AutoTokenizer

        source = resolve_checkpoint(cfg)
        local_only = offline_mode() or Path(source).is_dir()
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(source, local_files_only=local_only)
            self.transformer = AutoModel.from_pretrained(source, local_files_only=local_only)
        except (OSError, ValueError) as exc:
            raise FileNotFoundError(f"checkpoint unavailable: {source} ({exc})") from exc
        self.cfg = cfg
        self.frozen = cfg.freeze_encoder
        if self.frozen:
            for p in self.transformer.parameters():
                p.requires_grad_(False)
            self.transformer.eval()

    @property
    def hidden_size(self) -> int:
        return int(self.transformer.config.hidden_size)

    def train(self, mode: bool = True):
        super().train(mode)
        if self.frozen:
            self.transformer.eval()
        return self

    def tokenize(self, texts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        """Subword-encode ``texts``, padded and truncated to ``max_subword_len``."""
        if len(texts) == 0:
            empty = torch.zeros((0, self.cfg.max_subword_len), dtype=torch.long)
            return empty, empty.clone()
        enc = self.tokenizer(
            list(texts),
            truncation=True,
            max_length=self.cfg.max_subword_len,
            padding="max_length",
            return_tensors="pt",
        )
        return enc["input_ids"], enc["attention_mask"]

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        out = self.transformer(input_ids=input_ids, attention_mask=attention_mask)
        return out.last_hidden_state[:, 0]

    def encode(self, text: str) -> torch.Tensor:
        """CLS vector for one essay, computed in eval mode without gradients."""
        was_training = self.training
        self.eval()
        try:
            ids, mask = self.tokenize([text])
            with torch.no_grad():
                vec = self.forward(ids, mask)[0]
        finally:
            self.train(was_training)
        return vec


class ProjectionHead(nn.Module):
    """Linear + Tanh + Dropout applied to the CLS feature.

    Dropout only fires in train mode; eval output is deterministic.
    """

    def __init__(self, in_dim: int, out_dim: int, dropout_p: float = 0.2):
        super().__init__()
        self.linear = nn.Linear(in_dim, out_dim)
        self.activation = nn.Tanh()
        self.dropout = nn.Dropout(dropout_p)

    @property
    def out_dim(self) -> int:
        return self.linear.out_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.dropout(self.activation(self.linear(x)))
