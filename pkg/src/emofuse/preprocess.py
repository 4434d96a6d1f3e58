"""Text cleaning, stopword filtering and length-capped tokenization.

Every feature branch of the classifier consumes the same prepared token
sequence: lowercase, letters only, stopwords dropped, at most ``max_len``
tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

DEFAULT_MAX_TOKENS = 100

_NON_LETTER = re.compile(r"[^a-z]+")


@dataclass(frozen=True)
class TokenSequence:
    """Cleaned word tokens plus the pre-truncation word count."""

    tokens: tuple[str, ...]
    original_length: int

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def clean_text(raw: str) -> str:
    """Lowercase ``raw`` and reduce it to letters and single spaces.

    Digits, punctuation and every other non-letter character act as word
    separators; leading, trailing and repeated whitespace collapses away.
    The empty string is a valid result.
    """
    return _NON_LETTER.sub(" ", raw.lower()).strip()


def tokenize_truncate(text: str, max_len: int = DEFAULT_MAX_TOKENS) -> TokenSequence:
    """Whitespace-split ``text`` and keep the first ``max_len`` tokens."""
    if max_len < 1:
        raise ValueError(f"max_len must be positive, got {max_len}")
    words = text.split()
    return TokenSequence(tokens=tuple(words[:max_len]), original_length=len(words))


def remove_stopwords(tokens: Sequence[str], stops: frozenset[str] | set[str]) -> list[str]:
    """Drop stopword members from ``tokens``, preserving relative order."""
    return [t for t in tokens if t not in stops]


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stopword file: one word per line, ``#`` lines are comments.

    With ``path=None`` the packaged English list is used.
    """
    if path is None:
        text = resources.files("emofuse.data").joinpath("stopwords_en.txt").read_text("utf-8")
        source = "packaged stopword list"
    else:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"stopword file not found: {p}")
        text = p.read_text("utf-8")
        source = str(p)
    words = set()
    for line in text.splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word)
    if not words:
        raise ValueError(f"stopword list is empty: {source}")
    return frozenset(words)


def preprocess_text(
    raw: str,
    stops: frozenset[str] | set[str] | None = None,
    max_len: int = DEFAULT_MAX_TOKENS,
) -> TokenSequence:
    """Full pipeline: clean, drop stopwords, cap the token count.

    ``stops=None`` skips stopword removal. Truncation happens last, so
    ``original_length`` counts the stopword-filtered words.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be positive, got {max_len}")
    words = clean_text(raw).split()
    if stops is not None:
        words = [w for w in words if w not in stops]
    return TokenSequence(tokens=tuple(words[:max_len]), original_length=len(words))
