"""Training protocol: seeded runs, early stopping, evaluation, ablation."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
import torch.nn.functional as F
import yaml

from .fusion import predict_batch
from .metrics import RunMetrics, accuracy, macro_f1
from .model import FeaturizedSplit, VARIANTS

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Optimization protocol shared by every variant."""

    variant: str = "roberta_nrc_ewe"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.99
    batch_size: int = 64
    patience: int = 10
    max_epochs: int = 100
    seeds: list[int] = field(default_factory=lambda: [13, 42, 2022])
    weight_decay: float = 0.01

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        for name in ("beta1", "beta2"):
            beta = getattr(self, name)
            if not 0.0 <= beta < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {beta}")
        for name in ("batch_size", "patience", "max_epochs"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.seeds:
            raise ValueError("seeds must not be empty")


class EarlyStopping:
    """Stops after ``patience`` consecutive epochs without a new best value."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError(f"patience must be positive, got {patience}")
        self.patience = patience
        self.best = float("inf")
        self.epochs_since_best = 0

    def update(self, value: float) -> bool:
        """Record one epoch's monitored value; True when it beats the best so far."""
        if value < self.best:
            self.best = value
            self.epochs_since_best = 0
            return True
        self.epochs_since_best += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.epochs_since_best >= self.patience


@dataclass
class EpochRecord:
    """One epoch of history: losses plus validation metrics."""

    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    val_macro_f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def run_training_loop(
    step: Callable[[int], EpochRecord],
    *,
    max_epochs: int,
    patience: int,
    on_improve: Callable[[int, EpochRecord], None] | None = None,
) -> tuple[list[EpochRecord], int]:
    """Drive ``step(epoch)`` under early stopping on validation loss.

    ``on_improve`` fires whenever an epoch's val_loss strictly beats the
    best seen so far. Returns (history, best_epoch); best_epoch is 0 when
    no epoch ever improved.
    """
    stopper = EarlyStopping(patience)
    history: list[EpochRecord] = []
    best_epoch = 0
    for epoch in range(1, max_epochs + 1):
        record = step(epoch)
        history.append(record)
        if stopper.update(record.val_loss):
            best_epoch = epoch
            if on_improve is not None:
                on_improve(epoch, record)
        if stopper.should_stop:
            break
    return history, best_epoch


def set_seed(seed: int) -> None:
    """Seed the python, numpy and torch RNGs."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


@dataclass
class TrainResult:
    """Outcome of one seeded run; ``model`` carries the best-epoch weights."""

    model: torch.nn.Module
    history: list[EpochRecord]
    best_epoch: int
    best_val_loss: float
    seed: int
    variant: str

    @property
    def epochs_run(self) -> int:
        return len(self.history)


def validation_pass(
    model: torch.nn.Module,
    features: FeaturizedSplit,
    batch_size: int,
    device: str | torch.device = "cpu",
) -> tuple[float, float, float]:
    """Mean cross-entropy, accuracy and macro F1 over a labeled split."""
    if features.labels is None:
        raise ValueError("validation split has no gold labels")
    model.eval()
    n = len(features)
    total = 0.0
    preds: list[np.ndarray] = []
    n_classes = None
    with torch.no_grad():
        for index in torch.arange(n).split(batch_size):
            logits = model(**features.batch(index, device))
            labels = features.batch_labels(index, device)
            total += F.cross_entropy(logits, labels, reduction="sum").item()
            n_classes = logits.shape[-1]
            preds.append(predict_batch(torch.softmax(logits, dim=-1)))
    pred = np.concatenate(preds)
    gold = features.labels.numpy()
    return total / n, accuracy(gold, pred), macro_f1(gold, pred, n_classes)


def train(
    model_factory: Callable[[], torch.nn.Module],
    train_features: FeaturizedSplit,
    val_features: FeaturizedSplit,
    cfg: TrainConfig,
    seed: int,
    device: str | torch.device = "cpu",
) -> TrainResult:
    """One seeded run: AdamW, cross-entropy, early stopping on val loss.

    The factory is called after seeding, so parameter init, shuffling and
    dropout are all reproducible from ``seed``. Batch shuffling draws
    from its own generator; two runs with the same seed therefore consume
    identical permutations regardless of variant.
    """
    if len(train_features) == 0:
        raise ValueError("empty training split")
    if len(val_features) == 0:
        raise ValueError("empty validation split")
    if train_features.labels is None:
        raise ValueError("training split has no gold labels")
    if val_features.labels is None:
        raise ValueError("validation split has no gold labels")

    set_seed(seed)
    shuffle_rng = torch.Generator().manual_seed(seed)
    model = model_factory().to(device)
    trainable = [p for p in model.parameters() if p.requires_grad]
    if not trainable:
        raise ValueError("model has no trainable parameters")
    optimizer = torch.optim.AdamW(
        trainable, lr=cfg.lr, betas=(cfg.beta1, cfg.beta2), weight_decay=cfg.weight_decay
    )
    n = len(train_features)
    best_state: dict | None = None

    def run_epoch(epoch: int) -> EpochRecord:
        model.train()
        order = torch.randperm(n, generator=shuffle_rng)
        total = 0.0
        for index in order.split(cfg.batch_size):
            inputs = train_features.batch(index, device)
            labels = train_features.batch_labels(index, device)
            logits = model(**inputs)
            loss = F.cross_entropy(logits, labels)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss at epoch {epoch} (lr={cfg.lr}); aborting"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(index)
        val_loss, val_acc, val_f1 = validation_pass(model, val_features, cfg.batch_size, device)
        record = EpochRecord(epoch, total / n, val_loss, val_acc, val_f1)
        logger.info(
            "seed %d epoch %d: train_loss=%.4f val_loss=%.4f val_acc=%.4f val_f1=%.4f",
            seed, epoch, record.train_loss, record.val_loss, record.val_accuracy, record.val_macro_f1,
        )
        return record

    def snapshot(epoch: int, record: EpochRecord) -> None:
        nonlocal best_state
        best_state = {k: v.detach().cpu().clone() for k, v in model.state_dict().items()}

    history, best_epoch = run_training_loop(
        run_epoch, max_epochs=cfg.max_epochs, patience=cfg.patience, on_improve=snapshot
    )
    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainResult(
        model=model,
        history=history,
        best_epoch=best_epoch,
        best_val_loss=min(r.val_loss for r in history),
        seed=seed,
        variant=cfg.variant,
    )


def evaluate(
    model: torch.nn.Module,
    features: FeaturizedSplit,
    n_classes: int,
    split_name: str,
    *,
    batch_size: int = 64,
    device: str | torch.device = "cpu",
    seed: int = 0,
    epochs_run: int = 0,
) -> RunMetrics:
    """Accuracy and macro F1 of ``model`` on a labeled featurized split."""
    if features.labels is None:
        raise ValueError(f"{split_name} split has no gold labels")
    model.eval()
    preds: list[np.ndarray] = []
    with torch.no_grad():
        for index in torch.arange(len(features)).split(batch_size):
            logits = model(**features.batch(index, device))
            preds.append(predict_batch(torch.softmax(logits, dim=-1)))
    pred = np.concatenate(preds)
    gold = features.labels.numpy()
    return RunMetrics(
        split=split_name,
        accuracy=accuracy(gold, pred),
        macro_f1=macro_f1(gold, pred, n_classes),
        seed=seed,
        epochs_run=epochs_run,
    )


@dataclass
class AblationRun:
    """One (variant, seed) training run with metrics on both splits."""

    variant: str
    seed: int
    epochs_run: int
    train: RunMetrics
    validation: RunMetrics

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "seed": self.seed,
            "epochs_run": self.epochs_run,
            "splits": {
                "train": {"accuracy": self.train.accuracy, "macro_f1": self.train.macro_f1},
                "validation": {
                    "accuracy": self.validation.accuracy,
                    "macro_f1": self.validation.macro_f1,
                },
            },
        }


@dataclass
class AblationReport:
    """All runs of an ablation sweep plus seed-averaged summaries."""

    runs: list[AblationRun]

    def variants(self) -> list[str]:
        seen: list[str] = []
        for run in self.runs:
            if run.variant not in seen:
                seen.append(run.variant)
        return seen

    def averaged(self) -> dict[str, dict[str, dict[str, float]]]:
        """Arithmetic mean of per-seed metrics, keyed variant -> split."""
        out: dict[str, dict[str, dict[str, float]]] = {}
        for variant in self.variants():
            rows = [r for r in self.runs if r.variant == variant]
            out[variant] = {
                "train": {
                    "accuracy": float(np.mean([r.train.accuracy for r in rows])),
                    "macro_f1": float(np.mean([r.train.macro_f1 for r in rows])),
                },
                "validation": {
                    "accuracy": float(np.mean([r.validation.accuracy for r in rows])),
                    "macro_f1": float(np.mean([r.validation.macro_f1 for r in rows])),
                },
            }
        return out

    def to_dict(self) -> dict:
        return {"runs": [r.to_dict() for r in self.runs], "averaged": self.averaged()}

    def format_table(self) -> str:
        """Plain-text comparison: accuracy and macro F1 on train/validation."""
        header = (
            f"{'Model':<20} {'Acc(train)':>10} {'Acc(val)':>10} {'F1(train)':>10} {'F1(val)':>10}"
        )
        lines = [header, "-" * len(header)]
        averaged = self.averaged()
        for variant in self.variants():
            row = averaged[variant]
            lines.append(
                f"{variant:<20} {row['train']['accuracy']:>10.4f} {row['validation']['accuracy']:>10.4f}"
                f" {row['train']['macro_f1']:>10.4f} {row['validation']['macro_f1']:>10.4f}"
            )
        return "\n".join(lines)


def run_ablation(
    model_factories: dict[str, Callable[[], torch.nn.Module]],
    train_features: FeaturizedSplit,
    val_features: FeaturizedSplit,
    cfg: TrainConfig,
    seeds: Sequence[int] | None = None,
    device: str | torch.device = "cpu",
    on_run: Callable[[AblationRun, TrainResult], None] | None = None,
) -> AblationReport:
    """Train every variant with every seed and collect both-split metrics.

    The identical seed list applies to every variant, so rows stay
    pairwise comparable run by run. ``on_run`` fires after each run,
    e.g. to persist its checkpoint.
    """
    seeds = list(seeds if seeds is not None else cfg.seeds)
    runs: list[AblationRun] = []
    for variant, factory in model_factories.items():
        run_cfg = replace(cfg, variant=variant)
        for seed in seeds:
            result = train(factory, train_features, val_features, run_cfg, seed, device)
            n_classes = result.model.head.n_classes
            train_metrics = evaluate(
                result.model, train_features, n_classes, "train",
                batch_size=cfg.batch_size, device=device, seed=seed, epochs_run=result.epochs_run,
            )
            val_metrics = evaluate(
                result.model, val_features, n_classes, "validation",
                batch_size=cfg.batch_size, device=device, seed=seed, epochs_run=result.epochs_run,
            )
            run = AblationRun(
                variant=variant,
                seed=seed,
                epochs_run=result.epochs_run,
                train=train_metrics,
                validation=val_metrics,
            )
            runs.append(run)
            if on_run is not None:
                on_run(run, result)
    return AblationReport(runs=runs)


def save_run(
    run_dir: str | Path,
    result: TrainResult,
    config_snapshot: dict,
    metrics: Sequence[RunMetrics],
) -> Path:
    """Write one run's artifacts.

    Layout: ``config.yaml`` (snapshot), ``model.pt`` (parameter blob),
    ``best.json`` (best-epoch marker), ``history.jsonl`` (one epoch per
    line) and ``metrics.json``.
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "config.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_snapshot, fh, sort_keys=True)
    torch.save(result.model.state_dict(), run_dir / "model.pt")
    best = {
        "variant": result.variant,
        "seed": result.seed,
        "best_epoch": result.best_epoch,
        "best_val_loss": result.best_val_loss,
        "epochs_run": result.epochs_run,
    }
    with open(run_dir / "best.json", "w", encoding="utf-8") as fh:
        json.dump(best, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(run_dir / "history.jsonl", "w", encoding="utf-8") as fh:
        for record in result.history:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    payload = {
        "variant": result.variant,
        "seed": result.seed,
        "epochs_run": result.epochs_run,
        "splits": {m.split: {"accuracy": m.accuracy, "macro_f1": m.macro_f1} for m in metrics},
    }
    with open(run_dir / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return run_dir


def load_model_state(run_dir: str | Path, model: torch.nn.Module) -> None:
    """Load a run's parameter blob into ``model``; head sizes must match."""
    path = Path(run_dir) / "model.pt"
    if not path.is_file():
        raise FileNotFoundError(f"no parameter blob at {path}")
    state = torch.load(path, map_location="cpu", weights_only=True)
    key = "head.linear.weight"
    if key in state and hasattr(model, "head"):
        got = tuple(state[key].shape)
        want = tuple(model.head.linear.weight.shape)
        if got != want:
            raise ValueError(
                f"checkpoint head takes {got[1]} features for {got[0]} classes but the "
                f"configured model expects {want[1]} features for {want[0]} classes"
            )
    model.load_state_dict(state)
