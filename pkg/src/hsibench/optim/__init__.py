"""Training recipe: belief-based optimizer, plateau-with-restart scheduler,
gradient accumulation, the epoch loop, and checkpointing."""

from .adabelief import NonFiniteGradientError, OptimizerState, adabelief_step, init_optimizer_state
from .checkpoint import (
    Checkpoint,
    CheckpointMismatchError,
    CheckpointVersionError,
    CorruptCheckpointError,
    load_checkpoint,
    save_checkpoint,
    snapshot,
)
from .loop import (
    HISTORY_HEADER,
    FitResult,
    HistoryRow,
    NonFiniteLossError,
    TrainConfig,
    epoch_order,
    evaluate,
    fit,
    samples_to_tensors,
    train_epoch,
)
from .scheduler import SchedulerState, scheduler_update

__all__ = [
    "NonFiniteGradientError",
    "OptimizerState",
    "adabelief_step",
    "init_optimizer_state",
    "Checkpoint",
    "CheckpointMismatchError",
    "CheckpointVersionError",
    "CorruptCheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "snapshot",
    "HISTORY_HEADER",
    "FitResult",
    "HistoryRow",
    "NonFiniteLossError",
    "TrainConfig",
    "epoch_order",
    "evaluate",
    "fit",
    "samples_to_tensors",
    "train_epoch",
    "SchedulerState",
    "scheduler_update",
]
