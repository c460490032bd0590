"""Class-weight computation and the combined class-weighted cross-entropy +
Dice objective with ignore-pixel semantics.

All loss functions take logits for a single scene, shape (K, H, W), and are
differentiable through torch autograd.  Pixels labeled ignore contribute
nothing to values or gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .core import IGNORE_ID, LabelMap
from .data.stats import PixelStats

__all__ = [
    "ClassWeights",
    "LossConfig",
    "compute_class_weights",
    "weighted_cross_entropy",
    "dice_loss",
    "combined_loss",
]


@dataclass(frozen=True)
class ClassWeights:
    """Per-class loss weights, mean 1 over classes that actually occur.

    Zero-count classes get weight 0: they cannot contribute loss anyway.
    """

    weights: tuple[float, ...]
    provenance: PixelStats | None = None

    def __post_init__(self) -> None:
        ws = np.asarray(self.weights, dtype=np.float64)
        if not np.isfinite(ws).all() or (ws < 0).any():
            raise ValueError("weights must be finite and non-negative")
        positive = ws[ws > 0]
        if positive.size == 0:
            raise ValueError("at least one positive weight required")
        if abs(positive.mean() - 1.0) > 1e-9:
            raise ValueError(f"weights must average to 1 over occurring classes, got {positive.mean()!r}")

    @staticmethod
    def uniform(num_classes: int) -> ClassWeights:
        return ClassWeights(weights=(1.0,) * num_classes)

    def tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        return torch.tensor(self.weights, dtype=dtype)


def compute_class_weights(stats: PixelStats, mode: str = "reciprocal") -> ClassWeights:
    """Weights from pixel statistics.

    "reciprocal" (default): w_k proportional to 1/share_k, renormalized to
    mean 1 over classes with nonzero counts.  "median": median-frequency
    balancing, w_k = median(freq)/freq_k, same renormalization.
    """
    counts = np.asarray(stats.counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("all-zero pixel statistics: weights undefined")
    nonzero = counts > 0
    freq = counts[nonzero] / total
    if mode == "reciprocal":
        raw = 1.0 / freq
    elif mode == "median":
        raw = np.median(freq) / freq
    else:
        raise ValueError(f"unknown weight mode {mode!r}")
    raw = raw / raw.mean()
    weights = np.zeros(len(stats.counts))
    weights[nonzero] = raw
    return ClassWeights(weights=tuple(float(w) for w in weights), provenance=stats)


@dataclass(frozen=True)
class LossConfig:
    ce_coefficient: float = 1.0
    dice_coefficient: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.ce_coefficient < 0 or self.dice_coefficient < 0:
            raise ValueError("loss coefficients must be >= 0")
        if self.ce_coefficient + self.dice_coefficient <= 0:
            raise ValueError("at least one loss coefficient must be positive")
        if self.epsilon <= 0:
            raise ValueError("smoothing epsilon must be positive")


def _labels_tensor(labels: LabelMap | torch.Tensor | np.ndarray) -> torch.Tensor:
    if isinstance(labels, LabelMap):
        return torch.from_numpy(np.array(labels.labels, dtype=np.int64))
    if isinstance(labels, np.ndarray):
        return torch.from_numpy(labels.astype(np.int64))
    return labels.long()


def _check_shapes(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    if logits.ndim != 3:
        raise ValueError(f"logits must be (K, H, W), got {tuple(logits.shape)}")
    if labels.shape != logits.shape[1:]:
        raise ValueError(f"labels {tuple(labels.shape)} do not match logits {tuple(logits.shape[1:])}")
    mask = labels != IGNORE_ID
    if not bool(mask.any()):
        raise ValueError("no supervised pixels: every label is ignore")
    k = logits.shape[0]
    if int(labels[mask].max()) >= k:
        raise ValueError(f"label id {int(labels[mask].max())} >= K={k}")
    return mask


def weighted_cross_entropy(
    logits: torch.Tensor,
    labels: LabelMap | torch.Tensor | np.ndarray,
    weights: ClassWeights,
) -> torch.Tensor:
    """Per-pixel negative log-softmax of the true class, scaled by its class
    weight, reduced as sum(w * nll) / sum(w) over supervised pixels."""
    labels_t = _labels_tensor(labels)
    mask = _check_shapes(logits, labels_t)
    k = logits.shape[0]
    logp = torch.log_softmax(logits, dim=0)
    safe = torch.where(mask, labels_t, torch.zeros_like(labels_t))
    nll = -logp.gather(0, safe.unsqueeze(0)).squeeze(0)
    w = weights.tensor(logits.dtype)[safe] * mask.to(logits.dtype)
    denom = w.sum()
    if float(denom) <= 0:
        raise ValueError("no positively weighted supervised pixels")
    return (w * nll).sum() / denom


def dice_loss(
    logits: torch.Tensor,
    labels: LabelMap | torch.Tensor | np.ndarray,
    epsilon: float = 1e-6,
) -> torch.Tensor:
    """Macro soft-Dice loss over classes present in the supervised region.

    dice_k = (2 * sum(p_k * g_k) + eps) / (sum(p_k) + sum(g_k) + eps) with
    sums over non-ignore pixels and one-hot g; classes absent from the
    ground truth are excluded from the mean.
    """
    labels_t = _labels_tensor(labels)
    mask = _check_shapes(logits, labels_t)
    k = logits.shape[0]
    p = torch.softmax(logits, dim=0)
    maskf = mask.to(logits.dtype)
    safe = torch.where(mask, labels_t, torch.zeros_like(labels_t))
    onehot = torch.nn.functional.one_hot(safe, num_classes=k).permute(2, 0, 1).to(logits.dtype)
    onehot = onehot * maskf
    inter = (p * onehot).flatten(1).sum(dim=1)
    p_sum = (p * maskf).flatten(1).sum(dim=1)
    g_sum = onehot.flatten(1).sum(dim=1)
    present = g_sum > 0
    dice = (2.0 * inter[present] + epsilon) / (p_sum[present] + g_sum[present] + epsilon)
    return 1.0 - dice.mean()


def combined_loss(
    logits: torch.Tensor,
    labels: LabelMap | torch.Tensor | np.ndarray,
    weights: ClassWeights,
    config: LossConfig,
) -> torch.Tensor:
    """ce_coefficient * weighted CE + dice_coefficient * Dice."""
    total = logits.new_zeros(())
    if config.ce_coefficient > 0:
        total = total + config.ce_coefficient * weighted_cross_entropy(logits, labels, weights)
    if config.dice_coefficient > 0:
        total = total + config.dice_coefficient * dice_loss(logits, labels, config.epsilon)
    return total
