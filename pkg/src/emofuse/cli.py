"""Command line interface: prepare, featurize, train, evaluate, predict, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import torch

from .config import AppConfig
from .corpus import (
    DatasetSplit,
    EmptyDatasetError,
    LabelSet,
    class_distribution,
    load_dataset,
    save_distribution_chart,
)
from .encoder import ClsEncoder
from .ewe import EmbeddingMatrix, build_matrix
from .fusion import predict_batch
from .model import HybridEmotionClassifier, VARIANTS, featurize_split, preprocess_text
from .nrc import NrcLexicon, load_lexicon
from .preprocess import load_stopwords
from .training import (
    AblationReport,
    AblationRun,
    RunMetrics,
    load_model_state,
    run_ablation,
    save_run,
    set_seed,
)

PROG = "emofuse"

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# shared helpers


def _auto_device(name: str | None) -> str:
    if name:
        return name
    return "cuda" if torch.cuda.is_available() else "cpu"


def _require_path(value: str | None, what: str) -> Path:
    if not value:
        raise ValueError(f"config is missing a path for {what}")
    p = Path(value)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def _stops(cfg: AppConfig):
    if not cfg.preprocess.remove_stopwords:
        return None
    return load_stopwords(cfg.paths.stopwords)


_SPLIT_PATH_KEYS = {"train": "train_file", "validation": "validation_file", "test": "test_file"}


def _load_split(cfg: AppConfig, name: str, label_set: LabelSet, *, unlabeled: bool = False) -> DatasetSplit:
    key = _SPLIT_PATH_KEYS[name]
    path = _require_path(getattr(cfg.paths, key), f"paths.{key}")
    return load_dataset(
        path,
        label_set,
        name,
        essay_column=cfg.columns.essay,
        label_column=None if unlabeled else cfg.columns.label,
        id_column=cfg.columns.id,
    )


def _configured_splits(cfg: AppConfig, label_set: LabelSet) -> list[DatasetSplit]:
    splits = []
    for name, key in _SPLIT_PATH_KEYS.items():
        if getattr(cfg.paths, key):
            splits.append(_load_split(cfg, name, label_set))
    return splits


def _build_embeddings(cfg: AppConfig, label_set: LabelSet, stops) -> EmbeddingMatrix:
    """Vocabulary comes from every configured split, so rebuilding the
    matrix from the same config reproduces the same row layout."""
    path = _require_path(cfg.paths.ewe_embeddings, "paths.ewe_embeddings")
    sequences = []
    for split in _configured_splits(cfg, label_set):
        for essay in split.essays:
            sequences.append(preprocess_text(essay.raw_text, stops, cfg.preprocess.max_tokens).tokens)
    return build_matrix(sequences, path)


def _variant_resources(
    cfg: AppConfig, variants: list[str], label_set: LabelSet, stops
) -> tuple[EmbeddingMatrix | None, NrcLexicon | None]:
    emb = None
    lex = None
    if any(v in ("roberta_ewe", "roberta_nrc_ewe") for v in variants):
        emb = _build_embeddings(cfg, label_set, stops)
    if any(v == "roberta_nrc_ewe" for v in variants):
        lex = load_lexicon(_require_path(cfg.paths.nrc_lexicon, "paths.nrc_lexicon"))
    return emb, lex


def _featurize(cfg: AppConfig, split: DatasetSplit, encoder: ClsEncoder, emb, lex):
    return featurize_split(
        split,
        encoder,
        stops=_stops(cfg),
        max_tokens=cfg.preprocess.max_tokens,
        embedding_matrix=emb,
        lexicon=lex,
        encoder_on_filtered=cfg.preprocess.encoder_on_filtered,
    )


def _make_factory(cfg: AppConfig, variant: str, n_classes: int, emb):
    def factory() -> HybridEmotionClassifier:
        encoder = ClsEncoder(cfg.encoder)
        return HybridEmotionClassifier(encoder, n_classes, variant, emb, cfg.cnn)

    return factory


def _config_snapshot(cfg: AppConfig, variant: str, seeds: list[int]) -> dict:
    snap = replace(cfg, train=replace(cfg.train, variant=variant, seeds=list(seeds)))
    return snap.to_dict()


def _parse_seeds(args) -> list[int] | None:
    if getattr(args, "seed", None) is not None and getattr(args, "seeds", None):
        raise ValueError("pass either --seed or --seeds, not both")
    if getattr(args, "seed", None) is not None:
        return [args.seed]
    if getattr(args, "seeds", None):
        try:
            return [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError:
            raise ValueError(f"--seeds must be a comma-separated list of integers, got {args.seeds!r}") from None
    return None


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def cmd_prepare(args) -> int:
    cfg = AppConfig.load(args.config)
    label_set = cfg.label_set()
    stops = _stops(cfg)
    out = Path(args.output or cfg.paths.output_dir) / "prepared"
    out.mkdir(parents=True, exist_ok=True)

    distributions: dict[str, dict[str, int]] = {}
    for name, key in _SPLIT_PATH_KEYS.items():
        if not getattr(cfg.paths, key):
            continue
        split = _load_split(cfg, name, label_set)
        cache = out / f"{name}.jsonl"
        with open(cache, "w", encoding="utf-8") as fh:
            for essay in split.essays:
                seq = preprocess_text(essay.raw_text, stops, cfg.preprocess.max_tokens)
                record = {
                    "id": essay.id,
                    "tokens": list(seq.tokens),
                    "original_length": seq.original_length,
                    "label": None if essay.gold_label is None else label_set.name(essay.gold_label),
                }
                fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
        print(f"{name}: {len(split)} essays -> {cache}")
        if all(e.gold_label is not None for e in split.essays):
            distributions[name] = class_distribution(split, label_set)
            if args.chart:
                chart = out / f"{name}_distribution.png"
                save_distribution_chart(distributions[name], chart, title=f"{name} class distribution")
                print(f"{name}: chart -> {chart}")
    if distributions:
        _write_json(out / "class_distribution.json", distributions)
        print(f"class distribution -> {out / 'class_distribution.json'}")
    return 0


def cmd_train(args) -> int:
    cfg = AppConfig.load(args.config)
    device = _auto_device(args.device)
    label_set = cfg.label_set()
    stops = _stops(cfg)
    variant = args.variant or cfg.train.variant
    seeds = _parse_seeds(args) or list(cfg.train.seeds)
    out_root = Path(args.output or cfg.paths.output_dir)
    variants = list(VARIANTS) if variant == "all" else [variant]

    train_split = _load_split(cfg, "train", label_set)
    val_split = _load_split(cfg, "validation", label_set)
    emb, lex = _variant_resources(cfg, variants, label_set, stops)
    encoder = ClsEncoder(cfg.encoder)  # tokenizer owner for featurization
    train_features = _featurize(cfg, train_split, encoder, emb, lex)
    val_features = _featurize(cfg, val_split, encoder, emb, lex)
    n_classes = len(label_set)

    factories = {v: _make_factory(cfg, v, n_classes, emb) for v in variants}

    def on_run(run: AblationRun, result) -> None:
        run_dir = out_root / run.variant / f"seed-{run.seed}"
        save_run(run_dir, result, _config_snapshot(cfg, run.variant, [run.seed]), [run.train, run.validation])
        print(
            f"run {run.variant} seed {run.seed}: epochs={run.epochs_run} "
            f"val_acc={run.validation.accuracy:.4f} val_f1={run.validation.macro_f1:.4f} -> {run_dir}"
        )

    run_cfg = replace(cfg.train, seeds=list(seeds))
    report = run_ablation(factories, train_features, val_features, run_cfg, seeds, device, on_run=on_run)

    if len(seeds) > 1:
        averaged = report.averaged()
        for v in report.variants():
            rows = [r.to_dict() for r in report.runs if r.variant == v]
            _write_json(
                out_root / v / "summary.json",
                {"variant": v, "seeds": list(seeds), "per_seed": rows, "averaged": averaged[v]},
            )
    if variant == "all":
        _write_json(out_root / "ablation.json", report.to_dict())
    print(report.format_table())
    return 0


def _model_for_checkpoint(args, needs_labeled_eval: bool = False):
    """Rebuild a model per config (checkpoint snapshot unless --config)
    and load the run's parameter blob into it."""
    ckpt = Path(args.checkpoint)
    if not ckpt.is_dir():
        raise FileNotFoundError(f"checkpoint directory not found: {ckpt}")
    cfg_path = args.config or ckpt / "config.yaml"
    cfg = AppConfig.load(cfg_path)
    variant = args.variant or cfg.train.variant
    label_set = cfg.label_set()
    stops = _stops(cfg)
    emb, lex = _variant_resources(cfg, [variant], label_set, stops)
    model = _make_factory(cfg, variant, len(label_set), emb)()
    load_model_state(ckpt, model)
    return cfg, model, label_set, stops, emb, lex


def cmd_evaluate(args) -> int:
    device = _auto_device(args.device)
    cfg, model, label_set, stops, emb, lex = _model_for_checkpoint(args)
    split = _load_split(cfg, args.split, label_set)
    features = _featurize(cfg, split, model.encoder, emb, lex)
    model.to(device)
    from .training import evaluate as evaluate_run

    metrics = evaluate_run(
        model, features, len(label_set), args.split, batch_size=cfg.train.batch_size, device=device
    )
    payload = {"split": args.split, "accuracy": metrics.accuracy, "macro_f1": metrics.macro_f1}
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.output:
        _write_json(Path(args.output), payload)
    return 0


def cmd_predict(args) -> int:
    device = _auto_device(args.device)
    out_path = Path(args.output)
    cfg, model, label_set, stops, emb, lex = _model_for_checkpoint(args)
    try:
        split = load_dataset(
            args.input,
            label_set,
            "test",
            essay_column=cfg.columns.essay,
            label_column=None,
            id_column=cfg.columns.id,
        )
    except EmptyDatasetError:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text("", encoding="utf-8")
        print(f"0 predictions -> {out_path}")
        return 0
    features = _featurize(cfg, split, model.encoder, emb, lex)
    model.to(device)
    model.eval()
    names: list[str] = []
    with torch.no_grad():
        for index in torch.arange(len(features)).split(cfg.train.batch_size):
            logits = model(**features.batch(index, device))
            for i in predict_batch(torch.softmax(logits, dim=-1)):
                names.append(label_set.name(int(i)))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(name + "\n" for name in names), encoding="utf-8")
    print(f"{len(names)} predictions -> {out_path}")
    return 0


def cmd_featurize(args) -> int:
    cfg = AppConfig.load(args.config)
    device = _auto_device(args.device)
    label_set = cfg.label_set()
    stops = _stops(cfg)
    variant = args.variant or cfg.train.variant
    emb, lex = _variant_resources(cfg, [variant], label_set, stops)
    set_seed(args.seed if args.seed is not None else cfg.train.seeds[0])
    model = _make_factory(cfg, variant, len(label_set), emb)()
    if args.checkpoint:
        load_model_state(Path(args.checkpoint), model)
    split = _load_split(cfg, args.split, label_set)
    features = _featurize(cfg, split, model.encoder, emb, lex)
    model.to(device)
    model.eval()
    blocks = []
    with torch.no_grad():
        for index in torch.arange(len(features)).split(cfg.train.batch_size):
            blocks.append(model.features(**features.batch(index, device)).cpu())
    fused = torch.cat(blocks).numpy() if blocks else torch.zeros((0, model.head.in_features)).numpy()

    out_path = Path(args.output or Path(cfg.paths.output_dir) / f"{args.split}_features.tsv")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    width = fused.shape[1]
    with open(out_path, "w", encoding="utf-8") as fh:
        header = ["id"] + [f"f_{i:04d}" for i in range(width)] + ["label"]
        fh.write("\t".join(header) + "\n")
        for row, essay_id in enumerate(features.ids):
            label = "" if features.labels is None else label_set.name(int(features.labels[row]))
            values = "\t".join(f"{v:.8g}" for v in fused[row])
            fh.write(f"{essay_id}\t{values}\t{label}\n")
    print(f"{len(features)} records of width {width} -> {out_path}")
    return 0


def cmd_report(args) -> int:
    runs: list[AblationRun] = []
    for raw in args.run_dirs:
        d = Path(raw)
        path = d / "metrics.json"
        if not path.is_file():
            raise ValueError(f"incomplete run directory: {d} (missing metrics.json)")
        try:
            data = json.loads(path.read_text("utf-8"))
            splits = data["splits"]
            runs.append(
                AblationRun(
                    variant=data["variant"],
                    seed=int(data["seed"]),
                    epochs_run=int(data["epochs_run"]),
                    train=RunMetrics("train", splits["train"]["accuracy"], splits["train"]["macro_f1"]),
                    validation=RunMetrics(
                        "validation",
                        splits["validation"]["accuracy"],
                        splits["validation"]["macro_f1"],
                    ),
                )
            )
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ValueError(f"incomplete run directory: {d} ({exc})") from None
    report = AblationReport(runs=runs)
    print(report.format_table())
    if args.output:
        _write_json(Path(args.output), report.to_dict())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Hybrid essay emotion classifier: transformer CLS features "
        "fused with an embedding-CNN feature and lexicon intensity scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="clean and cache the configured splits, report class counts")
    p.add_argument("--config", required=True, help="YAML config path")
    p.add_argument("--output", help="output directory (default: paths.output_dir)")
    p.add_argument("--chart", action="store_true", help="also write distribution bar charts")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one variant (or all) over one or more seeds")
    p.add_argument("--config", required=True, help="YAML config path")
    p.add_argument("--variant", choices=(*VARIANTS, "all"), help="model variant (default: config)")
    p.add_argument("--seed", type=int, help="single seed")
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--device", help="compute device, e.g. cpu or cuda")
    p.add_argument("--output", help="run directory root (default: paths.output_dir)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved run on a labeled split")
    p.add_argument("--checkpoint", required=True, help="run directory with model.pt")
    p.add_argument("--config", help="YAML config (default: the run's config snapshot)")
    p.add_argument("--variant", choices=VARIANTS, help="override the configured variant")
    p.add_argument("--split", choices=("train", "validation", "test"), default="validation")
    p.add_argument("--device", help="compute device")
    p.add_argument("--output", help="also write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="write one predicted label name per input row")
    p.add_argument("--checkpoint", required=True, help="run directory with model.pt")
    p.add_argument("--config", help="YAML config (default: the run's config snapshot)")
    p.add_argument("--variant", choices=VARIANTS, help="override the configured variant")
    p.add_argument("--input", required=True, help="tab-separated file with an essay column")
    p.add_argument("--output", required=True, help="predictions file to write")
    p.add_argument("--device", help="compute device")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("featurize", help="dump fused feature vectors for a split")
    p.add_argument("--config", required=True, help="YAML config path")
    p.add_argument("--split", choices=("train", "validation", "test"), default="train")
    p.add_argument("--variant", choices=VARIANTS, help="model variant (default: config)")
    p.add_argument("--checkpoint", help="optional run directory to take parameters from")
    p.add_argument("--seed", type=int, help="init seed when no checkpoint is given")
    p.add_argument("--device", help="compute device")
    p.add_argument("--output", help="output TSV path")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("report", help="aggregate run directories into a comparison table")
    p.add_argument("run_dirs", nargs="+", help="run directories containing metrics.json")
    p.add_argument("--output", help="also write the aggregated JSON here")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        from transformers.utils import logging as hf_logging

        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except ImportError:
        pass
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except Exception as exc:  # single-line machine-parsable error contract
        message = " ".join(str(exc).split())
        print(f"{PROG}: error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
