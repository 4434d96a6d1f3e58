"""Shared fixtures: a tiny local transformer checkpoint plus corpus,
lexicon and embedding fixture files, all built once per session."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import torch

from emofuse.config import AppConfig
from emofuse.encoder import ClsEncoder, EncoderConfig


def pytest_configure(config):
    try:
        from transformers.utils import logging as hf_logging

        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except ImportError:
        pass


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = getattr(getattr(item, "function", None), "_acceptance_criterion", None)
    if criterion is None:
        return
    num, name = criterion
    if report.when == "call":
        status = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        status = "SKIP"
    else:
        return
    print(f"\n[acceptance] criterion {num} ({name}): {status}")


# ---------------------------------------------------------------------------
# fixture corpus

TRAIN_ROWS = [
    ("anger", "I am so angry and furious, my rage is boiling over 100 degrees!"),
    ("anger", "Fury and anger fill the report about the unfair verdict."),
    ("anger", "The angry crowd shouted with rage at the broken promises."),
    ("disgust", "The rotten food made me sick, what a disgusting nasty mess."),
    ("disgust", "Utter disgust at the filthy conditions in the shelter."),
    ("disgust", "Gross and vile, the spoiled meat smelled disgusting."),
    ("fear", "I fear the dark storm, terror and dread grip the town."),
    ("fear", "Afraid and scared, the family hid from the frightening flood."),
    ("fear", "Panic and fear spread as the sirens wailed all night."),
    ("joy", "What a joyful day, so happy and glad about the great news!"),
    ("joy", "Delight and joy as the team celebrated the cheerful victory."),
    ("joy", "She felt glee and happiness at the wonderful party."),
    ("neutral", "The council met on Tuesday to discuss the annual budget."),
    ("neutral", "The report lists 3 tables and 2 figures about the survey."),
    ("neutral", "Officials described the schedule for the road maintenance."),
    ("sadness", "Deep sadness and sorrow after the sad farewell to a friend."),
    ("sadness", "Tears of grief and sadness fell at the memorial service."),
    ("sadness", "A gloomy, mournful mood settled over the quiet village."),
    ("surprise", "What a shocking surprise, totally unexpected and astonishing!"),
    ("surprise", "Amazed and startled by the sudden astonishing announcement."),
]

VAL_ROWS = [
    ("anger", "The furious driver honked with rage in the jam."),
    ("disgust", "A nasty, disgusting smell rose from the dump."),
    ("fear", "Scared of the thunder, the dog trembled in dread."),
    ("joy", "Happy and glad, the children laughed with joy."),
    ("neutral", "The committee will meet again next month."),
    ("sadness", "Sad and sorrowful, she wept at the grave."),
    ("surprise", "An unexpected and astonishing twist startled everyone."),
    ("fear", "Terror gripped the crew during the frightening storm."),
]

TEST_ROWS = [
    "The angry driver slammed the door in fury.",
    "Happy children played with joy in the park.",
    "A disgusting smell filled the nasty basement.",
    "The committee plans a meeting for the budget.",
    "Scared of the dark, the boy felt dread and terror.",
]

# dyadic scores (multiples of 1/64) keep intensity sums exact in float64
LEXICON_ROWS = [
    ("fury", "anger", 60 / 64),
    ("rage", "anger", 56 / 64),
    ("angry", "anger", 48 / 64),
    ("furious", "anger", 52 / 64),
    ("disgusting", "disgust", 58 / 64),
    ("nasty", "disgust", 44 / 64),
    ("gross", "disgust", 40 / 64),
    ("vile", "disgust", 50 / 64),
    ("fear", "fear", 54 / 64),
    ("terror", "fear", 62 / 64),
    ("dread", "fear", 48 / 64),
    ("scared", "fear", 46 / 64),
    ("panic", "fear", 52 / 64),
    ("joy", "joy", 58 / 64),
    ("happy", "joy", 50 / 64),
    ("glad", "joy", 44 / 64),
    ("glee", "joy", 46 / 64),
    ("cheerful", "joy", 42 / 64),
    ("sadness", "sadness", 56 / 64),
    ("sorrow", "sadness", 52 / 64),
    ("grief", "sadness", 58 / 64),
    ("sad", "sadness", 44 / 64),
    ("gloomy", "sadness", 40 / 64),
    ("surprise", "surprise", 48 / 64),
    ("astonishing", "surprise", 52 / 64),
    ("startled", "surprise", 46 / 64),
    ("unexpected", "surprise", 42 / 64),
    ("shocking", "surprise", 50 / 64),
    # emotions outside the six retained ones; the loader must drop these
    ("hope", "anticipation", 30 / 64),
    ("loyal", "trust", 36 / 64),
]

EMBED_WORDS = sorted(
    {
        "angry", "anger", "fury", "furious", "rage", "boiling", "unfair", "verdict",
        "disgust", "disgusting", "nasty", "gross", "vile", "rotten", "filthy", "spoiled",
        "fear", "terror", "dread", "scared", "afraid", "panic", "frightening", "storm",
        "joy", "joyful", "happy", "glad", "glee", "cheerful", "delight", "happiness",
        "sadness", "sorrow", "grief", "sad", "gloomy", "mournful", "tears", "farewell",
        "surprise", "astonishing", "startled", "unexpected", "shocking", "amazed", "sudden",
        "council", "report", "budget", "schedule", "committee", "meeting", "survey",
    }
)


def write_tsv(path: Path, rows, *, essay_column="essay", label_column="emotion") -> Path:
    lines = [f"{label_column}\t{essay_column}"]
    for label, text in rows:
        lines.append(f"{label}\t{text}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_unlabeled_tsv(path: Path, texts, *, essay_column="essay") -> Path:
    lines = [essay_column] + list(texts)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_lexicon(path: Path, rows) -> Path:
    lines = [f"{word}\t{emotion}\t{score!r}" for word, emotion, score in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_embeddings(path: Path, words, dim=300, *, header=False, seed=99) -> Path:
    rng = np.random.default_rng(seed)
    lines = []
    if header:
        lines.append(f"{len(words)} {dim}")
    for word in words:
        values = rng.uniform(-0.5, 0.5, size=dim)
        lines.append(word + " " + " ".join(f"{v:.6f}" for v in values))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("data")
    write_tsv(d / "train.tsv", TRAIN_ROWS)
    write_tsv(d / "validation.tsv", VAL_ROWS)
    write_unlabeled_tsv(d / "test.tsv", TEST_ROWS)
    write_lexicon(d / "lexicon.tsv", LEXICON_ROWS)
    write_embeddings(d / "embeddings.txt", EMBED_WORDS)
    return d


# ---------------------------------------------------------------------------
# tiny local transformer checkpoint (the sandbox has no model hub access)

EXTRA_SENTENCES = [
    "the quick brown fox jumps over the lazy dog",
    "a b c d e f g h i j k l m n o p q r s t u v w x y z",
    "numbers and words mix in everyday writing",
    "extra filler sentence for subword coverage",
]


def _build_tiny_checkpoint(target: Path) -> None:
    from tokenizers.implementations import ByteLevelBPETokenizer
    from tokenizers.processors import RobertaProcessing
    from transformers import RobertaConfig, RobertaModel, RobertaTokenizerFast

    texts = [text for _, text in TRAIN_ROWS + VAL_ROWS] + TEST_ROWS + EXTRA_SENTENCES
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(
        texts,
        vocab_size=600,
        min_frequency=1,
        special_tokens=["<s>", "<pad>", "</s>", "<unk>", "<mask>"],
    )
    backend = bpe._tokenizer
    backend.post_processor = RobertaProcessing(
        sep=("</s>", bpe.token_to_id("</s>")), cls=("<s>", bpe.token_to_id("<s>"))
    )
    tokenizer = RobertaTokenizerFast(
        tokenizer_object=backend,
        bos_token="<s>",
        eos_token="</s>",
        sep_token="</s>",
        cls_token="<s>",
        unk_token="<unk>",
        pad_token="<pad>",
        mask_token="<mask>",
    )
    tokenizer.save_pretrained(target)
    config = RobertaConfig(
        vocab_size=len(tokenizer),
        hidden_size=768,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=256,
        max_position_embeddings=160,
        type_vocab_size=1,
        pad_token_id=1,
        bos_token_id=0,
        eos_token_id=2,
    )
    torch.manual_seed(20240917)
    model = RobertaModel(config)
    model.save_pretrained(target)


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> Path:
    target = tmp_path_factory.mktemp("ckpt") / "tiny-roberta"
    target.mkdir()
    _build_tiny_checkpoint(target)
    return target


@pytest.fixture(scope="session")
def encoder_config(tiny_checkpoint) -> EncoderConfig:
    return EncoderConfig(checkpoint=str(tiny_checkpoint), freeze_encoder=True)


@pytest.fixture(scope="session")
def base_encoder(encoder_config) -> ClsEncoder:
    return ClsEncoder(encoder_config)


@pytest.fixture
def make_config(data_dir, tiny_checkpoint, tmp_path):
    """Write a ready-to-run YAML config pointing at the fixture data.

    Returns (config_path, output_dir); keyword overrides update the
    nested config dict before writing.
    """

    def _make(**overrides) -> tuple[Path, Path]:
        out_dir = tmp_path / "runs"
        cfg = AppConfig.from_dict({})
        cfg.paths.train_file = str(data_dir / "train.tsv")
        cfg.paths.validation_file = str(data_dir / "validation.tsv")
        cfg.paths.test_file = str(data_dir / "test.tsv")
        cfg.paths.nrc_lexicon = str(data_dir / "lexicon.tsv")
        cfg.paths.ewe_embeddings = str(data_dir / "embeddings.txt")
        cfg.paths.output_dir = str(out_dir)
        cfg.encoder.checkpoint = str(tiny_checkpoint)
        cfg.encoder.freeze_encoder = True
        cfg.train.max_epochs = 3
        cfg.train.batch_size = 8
        cfg.train.seeds = [7]
        data = cfg.to_dict()
        for dotted, value in overrides.items():
            node = data
            parts = dotted.split(".")
            for part in parts[:-1]:
                node = node[part]
            node[parts[-1]] = value
        cfg = AppConfig.from_dict(data)
        path = tmp_path / "config.yaml"
        cfg.save(path)
        return path, out_dir

    return _make
