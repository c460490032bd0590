"""Plateau learning-rate scheduler with a restart instead of a floor.

The rate decays by ``factor`` after ``patience + 1`` consecutive epochs
without improvement of the monitored metric (lower is better).  When a decay
would cross ``min_lr``, the rate instead restarts upward to
``restart_fraction ** restart_count * base_lr`` — each restart lands 10%
lower than the previous one by default ("geometric" mode), so the schedule
cannot loop at a constant rate forever.  "fixed" mode restarts to
``restart_fraction * base_lr`` every time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = ["SchedulerState", "scheduler_update"]


@dataclass(frozen=True)
class SchedulerState:
    base_lr: float = 6e-4
    factor: float = 0.9
    patience: int = 4
    min_lr: float = 5e-7
    restart_fraction: float = 0.9
    restart_mode: str = "geometric"
    current_lr: float = 6e-4
    best_metric: float = math.inf
    epochs_since_improvement: int = 0
    restart_count: int = 0

    def __post_init__(self) -> None:
        if self.base_lr <= 0 or self.current_lr <= 0:
            raise ValueError("learning rates must be positive")
        if not 0 < self.factor < 1 or not 0 < self.restart_fraction < 1:
            raise ValueError("factor and restart_fraction must be in (0, 1)")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.min_lr <= 0:
            raise ValueError("min_lr must be positive")
        if self.restart_mode not in ("geometric", "fixed"):
            raise ValueError(f"restart_mode must be 'geometric' or 'fixed', got {self.restart_mode!r}")

    @staticmethod
    def initial(base_lr: float = 6e-4, **kwargs) -> SchedulerState:
        return SchedulerState(base_lr=base_lr, current_lr=base_lr, **kwargs)

    def to_dict(self) -> dict:
        return {
            "base_lr": self.base_lr,
            "factor": self.factor,
            "patience": self.patience,
            "min_lr": self.min_lr,
            "restart_fraction": self.restart_fraction,
            "restart_mode": self.restart_mode,
            "current_lr": self.current_lr,
            "best_metric": None if math.isinf(self.best_metric) else self.best_metric,
            "epochs_since_improvement": self.epochs_since_improvement,
            "restart_count": self.restart_count,
        }

    @staticmethod
    def from_dict(obj: dict) -> SchedulerState:
        obj = dict(obj)
        if obj.get("best_metric") is None:
            obj["best_metric"] = math.inf
        return SchedulerState(**obj)


def scheduler_update(state: SchedulerState, epoch_metric: float) -> SchedulerState:
    """Advance the scheduler by one epoch of the monitored metric."""
    if not math.isfinite(epoch_metric):
        raise ValueError(f"epoch metric must be finite, got {epoch_metric}")
    if epoch_metric < state.best_metric:
        return replace(state, best_metric=epoch_metric, epochs_since_improvement=0)
    stagnant = state.epochs_since_improvement + 1
    if stagnant <= state.patience:
        return replace(state, epochs_since_improvement=stagnant)
    if state.current_lr * state.factor < state.min_lr:
        count = state.restart_count + 1
        if state.restart_mode == "geometric":
            new_lr = state.restart_fraction**count * state.base_lr
        else:
            new_lr = state.restart_fraction * state.base_lr
        return replace(state, current_lr=new_lr, epochs_since_improvement=0, restart_count=count)
    return replace(state, current_lr=state.current_lr * state.factor, epochs_since_improvement=0)
