"""Feature concatenation and the linear softmax classification head."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .nrc import NRC_DIM


@dataclass
class FeatureBundle:
    """Per-essay branch features: processed CLS (r), CNN (c), lexicon (n)."""

    r: torch.Tensor
    c: torch.Tensor
    n: torch.Tensor


def fuse(bundle: FeatureBundle, *, cnn_dim: int = 16, nrc_dim: int = NRC_DIM) -> torch.Tensor:
    """Concatenate [r; c; n] along the last axis.

    ``r`` may have any width (it defines the leading block); ``c`` and
    ``n`` must match the configured widths exactly.
    """
    if bundle.c.shape[-1] != cnn_dim:
        raise ValueError(f"cnn feature has width {bundle.c.shape[-1]}, expected {cnn_dim}")
    if bundle.n.shape[-1] != nrc_dim:
        raise ValueError(f"lexicon feature has width {bundle.n.shape[-1]}, expected {nrc_dim}")
    n = bundle.n.to(bundle.r.dtype)
    return torch.cat([bundle.r, bundle.c, n], dim=-1)


class ClassifierHead(nn.Module):
    """Single linear layer over the fused feature.

    Weights start uniform in +-1/sqrt(fan_in), the bias at zero, so a
    seeded run is reproducible.
    """

    def __init__(self, in_features: int, n_classes: int):
        super().__init__()
        if n_classes < 2:
            raise ValueError(f"need at least 2 classes, got {n_classes}")
        self.linear = nn.Linear(in_features, n_classes)
        bound = 1.0 / math.sqrt(in_features)
        nn.init.uniform_(self.linear.weight, -bound, bound)
        nn.init.zeros_(self.linear.bias)

    @property
    def in_features(self) -> int:
        return self.linear.in_features

    @property
    def n_classes(self) -> int:
        return self.linear.out_features

    def forward(self, fused: torch.Tensor) -> torch.Tensor:
        if fused.shape[-1] != self.linear.in_features:
            raise ValueError(
                f"fused feature has width {fused.shape[-1]}, head expects {self.linear.in_features}"
            )
        return self.linear(fused)


def classify(head: ClassifierHead, fused: torch.Tensor) -> torch.Tensor:
    """Class probabilities: softmax over the head's logits."""
    return torch.softmax(head(fused), dim=-1)


def _to_numpy(probs) -> np.ndarray:
    if torch.is_tensor(probs):
        return probs.detach().cpu().numpy()
    return np.asarray(probs)


def predict(probs) -> int:
    """Index of the most probable class; ties go to the lowest index."""
    arr = _to_numpy(probs)
    if arr.ndim != 1:
        raise ValueError(f"predict expects one distribution, got shape {arr.shape}")
    return int(np.argmax(arr))


def predict_batch(probs) -> np.ndarray:
    """Row-wise argmax with the same lowest-index tie rule as :func:`predict`."""
    arr = _to_numpy(probs)
    if arr.ndim != 2:
        raise ValueError(f"predict_batch expects a 2-d array, got shape {arr.shape}")
    return np.argmax(arr, axis=-1)
