"""Emotion intensity lexicon features.

Loads the word/emotion/intensity lexicon, keeps the six emotions the
feature vector covers (anger, joy, sadness, disgust, fear, surprise) and
turns an essay's tokens into a 6-dimensional vector of raw intensity
sums. Sums run over token occurrences, so a word appearing twice
contributes twice, and no normalization of any kind is applied.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EMOTION_ORDER = ("anger", "joy", "sadness", "disgust", "fear", "surprise")
NRC_DIM = len(EMOTION_ORDER)

_EMOTION_INDEX = {name: i for i, name in enumerate(EMOTION_ORDER)}


class NrcLexicon:
    """Word to per-emotion intensity map over the six retained emotions."""

    emotion_order = EMOTION_ORDER

    def __init__(self, entries: dict[str, dict[str, float]]):
        self.entries = entries

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def intensities(self, word: str) -> dict[str, float]:
        """Emotion/intensity pairs recorded for ``word`` (empty if absent)."""
        return self.entries.get(word, {})


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_lexicon(path: str | Path) -> NrcLexicon:
    """Parse a tab-separated word/emotion/score lexicon file.

    Rows carrying emotions outside the six retained ones (the lexicon
    also ships anticipation and trust) are dropped. A first line whose
    third field is non-numeric is treated as a header and skipped.
    Scores must be reals in [0, 1]; malformed rows raise.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"lexicon file not found: {p}")
    entries: dict[str, dict[str, float]] = {}
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{p}:{lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            word, emotion, raw_score = (part.strip() for part in parts)
            if lineno == 1 and not _is_number(raw_score):
                continue
            if not _is_number(raw_score):
                raise ValueError(f"{p}:{lineno}: non-numeric score {raw_score!r}")
            score = float(raw_score)
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{p}:{lineno}: score {score} outside [0, 1]")
            if emotion not in _EMOTION_INDEX:
                continue
            entries.setdefault(word.lower(), {})[emotion] = score
    if not entries:
        raise ValueError(
            f"empty lexicon after filtering: {p} has no rows for {list(EMOTION_ORDER)}"
        )
    return NrcLexicon(entries)


def score_essay(tokens: Iterable[str], lex: NrcLexicon) -> np.ndarray:
    """Sum per-emotion intensities over all token occurrences.

    Tokens missing from the lexicon contribute nothing. Returns a
    float64 vector ordered like ``EMOTION_ORDER``; the raw sums are
    intentionally left unscaled.
    """
    scores = np.zeros(NRC_DIM, dtype=np.float64)
    for token in tokens:
        found = lex.entries.get(token)
        if found:
            for emotion, intensity in found.items():
                scores[_EMOTION_INDEX[emotion]] += intensity
    return scores


def batch_score(token_sequences: Iterable[Sequence[str]], lex: NrcLexicon) -> np.ndarray:
    """Score every token sequence; returns an (n, 6) array in input order."""
    rows = [score_essay(seq, lex) for seq in token_sequences]
    if not rows:
        return np.zeros((0, NRC_DIM), dtype=np.float64)
    return np.stack(rows)
