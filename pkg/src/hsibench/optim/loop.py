"""The full training recipe: gradient-accumulated epochs under the belief
optimizer, plateau-with-restart scheduling on validation loss, best-model
selection by validation mean IoU, and a fixed epoch budget with no early
stopping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import torch

from ..core import IGNORE_ID, LabelMap, Sample
from ..losses import ClassWeights, LossConfig, combined_loss, compute_class_weights
from ..metrics import ConfusionMatrix, accumulate_confusion, per_class_metrics
from ..models import ArchSpec, build_model
from ..data.stats import compute_pixel_stats
from .adabelief import OptimizerState, adabelief_step, init_optimizer_state
from .checkpoint import Checkpoint, snapshot
from .scheduler import SchedulerState, scheduler_update

__all__ = [
    "TrainConfig",
    "HistoryRow",
    "FitResult",
    "NonFiniteLossError",
    "train_epoch",
    "evaluate",
    "fit",
    "epoch_order",
    "samples_to_tensors",
]


class NonFiniteLossError(RuntimeError):
    def __init__(self, batch_index: int, value: float):
        super().__init__(f"non-finite loss {value!r} at batch {batch_index}")
        self.batch_index = batch_index
        self.value = value


@dataclass(frozen=True)
class TrainConfig:
    arch: ArchSpec
    loss: LossConfig = field(default_factory=LossConfig)
    epochs: int = 300
    batch_size: int = 16
    accumulation_steps: int = 2
    precision: str = "full"
    seed: int = 0
    lr: float = 6e-4
    beta1: float = 0.9
    beta2: float = 0.99
    optimizer_eps: float = 1e-16
    scheduler_factor: float = 0.9
    scheduler_patience: int = 4
    scheduler_min_lr: float = 5e-7
    restart_fraction: float = 0.9
    restart_mode: str = "geometric"
    weight_mode: str = "reciprocal"
    dataset_path: str = ""
    dataset_name: str = ""

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1 or self.accumulation_steps < 1:
            raise ValueError("batch_size and accumulation_steps must be >= 1")
        if self.precision not in ("full", "mixed"):
            raise ValueError(f"precision must be 'full' or 'mixed', got {self.precision!r}")
        if self.lr <= 0:
            raise ValueError("lr must be positive")

    @property
    def effective_batch(self) -> int:
        return self.batch_size * self.accumulation_steps

    def scheduler_state(self) -> SchedulerState:
        return SchedulerState.initial(
            base_lr=self.lr,
            factor=self.scheduler_factor,
            patience=self.scheduler_patience,
            min_lr=self.scheduler_min_lr,
            restart_fraction=self.restart_fraction,
            restart_mode=self.restart_mode,
        )


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float
    val_miou: float

    def as_csv(self) -> str:
        return f"{self.epoch},{self.train_loss!r},{self.val_loss!r},{self.lr!r},{self.val_miou!r}"


HISTORY_HEADER = "epoch,train_loss,val_loss,lr,val_mIoU"


@dataclass
class FitResult:
    best: Checkpoint
    last: Checkpoint
    history: list[HistoryRow]
    weights: ClassWeights


def samples_to_tensors(
    samples: Sequence[Sample], dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack samples into (N, C, H, W) cubes and (N, H, W) int64 labels."""
    x = torch.stack([torch.from_numpy(np.array(s.cube.values)).to(dtype) for s in samples])
    y = torch.stack([torch.from_numpy(np.array(s.labels.labels, dtype=np.int64)) for s in samples])
    return x, y


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    """Sample order for an epoch: a pure function of (seed, epoch)."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def _autocast(precision: str):
    if precision == "mixed":
        return torch.autocast(device_type="cpu", dtype=torch.bfloat16)
    return torch.autocast(device_type="cpu", enabled=False)


def _batch_loss(
    model: torch.nn.Module,
    x: torch.Tensor,
    y: torch.Tensor,
    weights: ClassWeights,
    loss_config: LossConfig,
) -> torch.Tensor:
    # Mean of per-sample losses: keeps the batch objective decomposable, so
    # averaging micro-batch gradients reproduces the large-batch gradient.
    logits = model(x)
    per_sample = [combined_loss(logits[i], y[i], weights, loss_config) for i in range(x.shape[0])]
    return torch.stack(per_sample).mean()


def train_epoch(
    model: torch.nn.Module,
    batches: Iterable[tuple[torch.Tensor, torch.Tensor]],
    weights: ClassWeights,
    loss_config: LossConfig,
    opt_state: OptimizerState,
    lr: float,
    accumulation_steps: int,
    precision: str = "full",
) -> float:
    """One pass over the batches with gradient accumulation.

    Gradients are averaged across accumulation_steps micro-batches before
    each optimizer step; a shorter remainder is flushed as one smaller step.
    Returns the mean micro-batch loss.
    """
    model.train()
    params = [p for p in model.parameters() if p.requires_grad]
    for p in params:
        p.grad = None
    losses: list[float] = []
    pending = 0

    def apply_step() -> None:
        nonlocal pending
        grads = []
        for p in params:
            g = p.grad if p.grad is not None else torch.zeros_like(p)
            grads.append(g / pending)
        adabelief_step(params, grads, opt_state, lr)
        for p in params:
            p.grad = None
        pending = 0

    for index, (x, y) in enumerate(batches):
        with _autocast(precision):
            loss = _batch_loss(model, x, y, weights, loss_config)
        value = float(loss.detach())
        if not math.isfinite(value):
            raise NonFiniteLossError(index, value)
        loss.backward()
        losses.append(value)
        pending += 1
        if pending == accumulation_steps:
            apply_step()
    if pending:
        apply_step()
    if not losses:
        raise ValueError("no batches: empty data iterator")
    return float(np.mean(losses))


@dataclass(frozen=True)
class EvalOutcome:
    loss: float
    miou: float
    confusion: ConfusionMatrix


def evaluate(
    model: torch.nn.Module,
    x: torch.Tensor,
    y: torch.Tensor,
    weights: ClassWeights,
    loss_config: LossConfig,
    num_classes: int,
) -> EvalOutcome:
    """Loss and mean IoU over a stacked evaluation split."""
    model.eval()
    matrix = ConfusionMatrix.empty(num_classes)
    losses: list[float] = []
    with torch.no_grad():
        for i in range(x.shape[0]):
            logits = model(x[i : i + 1])[0]
            labels = y[i]
            if bool((labels != IGNORE_ID).any()):
                losses.append(float(combined_loss(logits, labels, weights, loss_config)))
            pred = LabelMap(logits.argmax(dim=0).numpy().astype(np.uint8))
            gt = LabelMap(labels.numpy().astype(np.uint8))
            accumulate_confusion(matrix, pred, gt)
    if not losses:
        raise ValueError("no supervised pixels in evaluation split")
    report = per_class_metrics(matrix)
    return EvalOutcome(loss=float(np.mean(losses)), miou=report.mean.iou, confusion=matrix)


def _model_dtype(precision: str) -> torch.dtype:
    # Mixed precision keeps float32 master weights; reduced precision applies
    # only to autocast compute regions.
    return torch.float32


def fit(
    config: TrainConfig,
    dataset,
    resume: Checkpoint | None = None,
    stop_after_epoch: int | None = None,
    on_epoch: Callable[[HistoryRow, bool, Callable[[], Checkpoint]], None] | None = None,
) -> FitResult:
    """Run the full recipe for exactly ``config.epochs`` epochs (no early
    stopping).  ``dataset`` is any object with a ``manifest`` and ``load(id)``
    (a canonical dataset directory handle).

    ``resume`` continues a checkpointed run; ``stop_after_epoch`` ends the
    session early without touching the epoch budget, to exercise
    resume-after-interruption.  ``on_epoch(row, is_best, make_checkpoint)``
    fires after every epoch.
    """
    manifest = dataset.manifest
    train_ids = manifest.ids_in_split("train")
    val_ids = manifest.ids_in_split("val")
    if not train_ids or not val_ids:
        raise ValueError("dataset needs non-empty train and val splits")
    train_samples = [dataset.load(sid) for sid in train_ids]
    val_samples = [dataset.load(sid) for sid in val_ids]

    stats = compute_pixel_stats(train_samples, manifest.descriptor.taxonomy)
    weights = compute_class_weights(stats, mode=config.weight_mode)

    handle = build_model(config.arch)
    model = handle.module.to(_model_dtype(config.precision))
    params = [p for p in model.parameters() if p.requires_grad]
    names = [n for n, p in model.named_parameters() if p.requires_grad]
    opt_state = init_optimizer_state(
        params, beta1=config.beta1, beta2=config.beta2, eps=config.optimizer_eps, names=names
    )
    sched = config.scheduler_state()
    history: list[HistoryRow] = []
    start_epoch = 1

    if resume is not None:
        resume.check_matches(config)
        with torch.no_grad():
            for (name, p) in model.named_parameters():
                p.copy_(resume.params[name])
            for m, saved in zip(opt_state.m, resume.opt_m):
                m.copy_(saved)
            for s, saved in zip(opt_state.s, resume.opt_s):
                s.copy_(saved)
        opt_state.step = resume.opt_step
        sched = SchedulerState.from_dict(resume.scheduler)
        history = list(resume.history)
        start_epoch = resume.epoch + 1

    dtype = _model_dtype(config.precision)
    train_x, train_y = samples_to_tensors(train_samples, dtype)
    val_x, val_y = samples_to_tensors(val_samples, dtype)

    provenance = {
        "dataset_name": manifest.descriptor.name,
        "dataset_path": config.dataset_path,
        "seed": config.seed,
        "taxonomy": manifest.descriptor.taxonomy.name,
        "class_weights": list(weights.weights),
        "split_sizes": {s: len(manifest.ids_in_split(s)) for s in ("train", "val", "test")},
    }

    def make_checkpoint(epoch: int) -> Checkpoint:
        return snapshot(model, opt_state, sched, epoch, config, history, provenance)

    best_miou = max((row.val_miou for row in history), default=-math.inf)
    best_ckpt: Checkpoint | None = None
    last_ckpt: Checkpoint | None = None

    final_epoch = config.epochs if stop_after_epoch is None else min(config.epochs, stop_after_epoch)
    if start_epoch > final_epoch:
        raise ValueError(f"nothing to do: resume epoch {start_epoch} past target {final_epoch}")

    for epoch in range(start_epoch, final_epoch + 1):
        order = epoch_order(len(train_samples), config.seed, epoch)
        batches = [
            (train_x[order[i : i + config.batch_size]], train_y[order[i : i + config.batch_size]])
            for i in range(0, len(order), config.batch_size)
        ]
        lr_used = sched.current_lr
        train_loss = train_epoch(
            model, batches, weights, config.loss, opt_state, lr_used,
            config.accumulation_steps, config.precision,
        )
        outcome = evaluate(model, val_x, val_y, weights, config.loss, manifest.descriptor.num_classes)
        row = HistoryRow(
            epoch=epoch, train_loss=train_loss, val_loss=outcome.loss,
            lr=lr_used, val_miou=outcome.miou,
        )
        history.append(row)
        sched = scheduler_update(sched, outcome.loss)
        is_best = outcome.miou > best_miou
        if is_best:
            best_miou = outcome.miou
            best_ckpt = make_checkpoint(epoch)
        last_ckpt = make_checkpoint(epoch)
        if on_epoch is not None:
            on_epoch(row, is_best, lambda e=epoch: make_checkpoint(e))

    assert last_ckpt is not None
    return FitResult(
        best=best_ckpt if best_ckpt is not None else last_ckpt,
        last=last_ckpt,
        history=history,
        weights=weights,
    )
