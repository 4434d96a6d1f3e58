"""Run configuration with a lossless YAML round trip."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .corpus import DEFAULT_LABELS, LabelSet
from .encoder import EncoderConfig
from .ewe import CnnConfig
from .training import TrainConfig


@dataclass
class PathsConfig:
    train_file: str | None = None
    validation_file: str | None = None
    test_file: str | None = None
    nrc_lexicon: str | None = None
    ewe_embeddings: str | None = None
    stopwords: str | None = None  # packaged English list when unset
    output_dir: str = "runs"


@dataclass
class ColumnsConfig:
    essay: str = "essay"
    label: str = "emotion"
    id: str | None = None


@dataclass
class PreprocessConfig:
    max_tokens: int = 100
    remove_stopwords: bool = True
    encoder_on_filtered: bool = True  # transformer sees stopword-filtered text

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError(f"preprocess.max_tokens must be positive, got {self.max_tokens}")


_SECTIONS = {
    "paths": PathsConfig,
    "columns": ColumnsConfig,
    "preprocess": PreprocessConfig,
    "encoder": EncoderConfig,
    "cnn": CnnConfig,
    "train": TrainConfig,
}


def _build_section(cls, data, where: str):
    if not isinstance(data, dict):
        raise ValueError(f"config section {where!r} must be a mapping")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ValueError(f"unknown config keys in section {where!r}: {unknown}")
    return cls(**data)


@dataclass
class AppConfig:
    """Everything a run needs: paths, label inventory and module settings."""

    labels: list[str] = field(default_factory=lambda: list(DEFAULT_LABELS))
    paths: PathsConfig = field(default_factory=PathsConfig)
    columns: ColumnsConfig = field(default_factory=ColumnsConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    cnn: CnnConfig = field(default_factory=CnnConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def label_set(self) -> LabelSet:
        return LabelSet(self.labels)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "AppConfig":
        data = dict(data or {})
        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            if name in data:
                kwargs[name] = _build_section(section_cls, data.pop(name), name)
        if "labels" in data:
            labels = data.pop("labels")
            if not isinstance(labels, list):
                raise ValueError("config key 'labels' must be a list of label names")
            kwargs["labels"] = [str(x) for x in labels]
        if data:
            raise ValueError(f"unknown top-level config keys: {sorted(data)}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "AppConfig":
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"config file not found: {p}")
        try:
            data = yaml.safe_load(p.read_text("utf-8"))
        except yaml.YAMLError as exc:
            raise ValueError(f"could not parse config {p}: {exc}") from None
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)
