"""Essay corpus ingestion, label bookkeeping and split statistics."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import pandas as pd

DEFAULT_LABELS = ("anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise")
SPLIT_NAMES = ("train", "validation", "test")


class EmptyDatasetError(ValueError):
    """A split file contains a header but no data rows."""


class LabelSet:
    """Ordered emotion label inventory with a name/index bijection."""

    def __init__(self, labels: Sequence[str]):
        labels = tuple(labels)
        if not labels:
            raise ValueError("label set must not be empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate label names: {list(labels)}")
        self.labels = labels
        self._index = {name: i for i, name in enumerate(labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelSet) and self.labels == other.labels

    def __repr__(self) -> str:
        return f"LabelSet({list(self.labels)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(
                f"unknown label {name!r}; known labels: {list(self.labels)}"
            ) from None

    def name(self, index: int) -> str:
        if not 0 <= index < len(self.labels):
            raise ValueError(f"label index {index} out of range 0..{len(self.labels) - 1}")
        return self.labels[index]


@dataclass(frozen=True)
class Essay:
    """One datapoint: identifier, raw text and optional gold label index."""

    id: str
    raw_text: str
    gold_label: int | None = None


@dataclass
class DatasetSplit:
    """All essays of one split, in file order."""

    name: str
    essays: list[Essay]

    def __len__(self) -> int:
        return len(self.essays)

    def __iter__(self):
        return iter(self.essays)


def load_dataset(
    path: str | Path,
    label_set: LabelSet,
    split_name: str,
    *,
    essay_column: str = "essay",
    label_column: str | None = "emotion",
    id_column: str | None = None,
) -> DatasetSplit:
    """Read one tab-separated split file into a :class:`DatasetSplit`.

    The file needs a header row naming at least ``essay_column``; the
    label column is mandatory for train and validation splits and
    optional for the test split (``label_column=None`` skips labels
    entirely, test split only). A row whose label is not in
    ``label_set`` raises instead of being dropped. Without ``id_column``
    row ids are synthesized from the split name and row position.
    """
    if split_name not in SPLIT_NAMES:
        raise ValueError(f"split_name must be one of {SPLIT_NAMES}, got {split_name!r}")
    if label_column is None and split_name != "test":
        raise ValueError(f"a label column is required for the {split_name!r} split")
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"dataset file not found: {p}")
    try:
        df = pd.read_csv(p, sep="\t", dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"empty dataset: {p} has no content") from None
    if essay_column not in df.columns:
        raise ValueError(
            f"missing required column {essay_column!r} in {p} (found: {list(df.columns)})"
        )
    has_labels = label_column is not None and label_column in df.columns
    if label_column is not None and not has_labels and split_name != "test":
        raise ValueError(
            f"missing required column {label_column!r} in {p} (found: {list(df.columns)})"
        )
    if len(df) == 0:
        raise EmptyDatasetError(f"empty dataset: {p} has a header but no data rows")

    if id_column is not None:
        if id_column not in df.columns:
            raise ValueError(f"missing id column {id_column!r} in {p}")
        ids = [str(v) for v in df[id_column]]
        seen = set()
        for eid in ids:
            if eid in seen:
                raise ValueError(f"duplicate essay id {eid!r} in {p}")
            seen.add(eid)
    else:
        ids = [f"{split_name}-{i:05d}" for i in range(len(df))]

    essays: list[Essay] = []
    texts = df[essay_column].tolist()
    raw_labels = df[label_column].tolist() if has_labels else [None] * len(df)
    for row, (eid, text, raw_label) in enumerate(zip(ids, texts, raw_labels), start=1):
        text = str(text)
        if not text.strip():
            raise ValueError(f"empty essay text at data row {row} of {p}")
        if raw_label is None:
            label = None
        else:
            try:
                label = label_set.index(str(raw_label).strip())
            except ValueError as exc:
                raise ValueError(f"data row {row} of {p}: {exc}") from None
        essays.append(Essay(id=eid, raw_text=text, gold_label=label))
    return DatasetSplit(name=split_name, essays=essays)


def class_distribution(split: DatasetSplit, label_set: LabelSet) -> dict[str, int]:
    """Per-label essay counts; every label appears, possibly with 0."""
    counts = {name: 0 for name in label_set}
    for essay in split.essays:
        if essay.gold_label is None:
            raise ValueError(
                f"essay {essay.id!r} has no gold label; cannot build a class distribution"
            )
        counts[label_set.name(essay.gold_label)] += 1
    return counts


def save_distribution_chart(counts: dict[str, int], path: str | Path, title: str = "Class distribution") -> None:
    """Write a bar chart of label counts to an image file."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    names = list(counts)
    ax.bar(names, [counts[n] for n in names], color="tab:blue")
    ax.set_xlabel("emotion")
    ax.set_ylabel("essays")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
