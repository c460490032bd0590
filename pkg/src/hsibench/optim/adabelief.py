"""Belief-based adaptive optimizer, implemented from first principles.

Update rule per step t with gradient g:

    m_t = b1 * m_{t-1} + (1 - b1) * g
    s_t = b2 * s_{t-1} + (1 - b2) * (g - m_t)^2 + eps
    m_hat = m_t / (1 - b1^t),   s_hat = s_t / (1 - b2^t)
    theta <- theta - lr * m_hat / (sqrt(s_hat) + eps)

The second moment tracks the deviation of the gradient from its running mean
(the "belief"), not the raw square, so consistent gradients produce large
effective steps.  s stays non-negative by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import torch

__all__ = ["OptimizerState", "init_optimizer_state", "adabelief_step", "NonFiniteGradientError"]


class NonFiniteGradientError(ValueError):
    """A gradient contained NaN or Inf."""


@dataclass
class OptimizerState:
    m: list[torch.Tensor]
    s: list[torch.Tensor]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.99
    eps: float = 1e-16
    names: tuple[str, ...] = field(default=())


def init_optimizer_state(
    params: Sequence[torch.Tensor],
    beta1: float = 0.9,
    beta2: float = 0.99,
    eps: float = 1e-16,
    names: Sequence[str] = (),
) -> OptimizerState:
    return OptimizerState(
        m=[torch.zeros_like(p) for p in params],
        s=[torch.zeros_like(p) for p in params],
        step=0,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        names=tuple(names),
    )


@torch.no_grad()
def adabelief_step(
    params: Sequence[torch.Tensor],
    grads: Sequence[torch.Tensor],
    state: OptimizerState,
    lr: float,
) -> OptimizerState:
    """One in-place update of params and state; returns the state."""
    if lr <= 0:
        raise ValueError(f"lr must be positive, got {lr}")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and state must have matching lengths")
    for i, g in enumerate(grads):
        if not bool(torch.isfinite(g).all()):
            name = state.names[i] if i < len(state.names) else f"param[{i}]"
            raise NonFiniteGradientError(f"non-finite gradient in {name}")
    state.step += 1
    t = state.step
    b1, b2, eps = state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    for p, g, m, s in zip(params, grads, state.m, state.s):
        m.mul_(b1).add_(g, alpha=1.0 - b1)
        diff = g - m
        s.mul_(b2).addcmul_(diff, diff, value=1.0 - b2).add_(eps)
        m_hat = m / bc1
        s_hat = s / bc2
        p.sub_(lr * m_hat / (s_hat.sqrt() + eps))
    return state
