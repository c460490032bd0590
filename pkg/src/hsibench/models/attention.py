"""Channel, spatial, and coordinate attention gates.

Each gate module returns its multiplicative weights (all squashed into the
open interval (0, 1) by a sigmoid); the enclosing block applies them to the
features.  Keeping gates and application separate makes the closed-form
zero-parameter behavior (every gate exactly 0.5) directly testable.
"""

from __future__ import annotations

import torch
from torch import nn

from .common import group_norm

__all__ = ["ChannelGate", "SpatialGate", "CBAMBlock", "CoordinateAttention"]


class ChannelGate(nn.Module):
    """Per-channel gate from global average- and max-pooled descriptors run
    through one shared two-layer bottleneck, summed, squashed by a sigmoid."""

    def __init__(self, channels: int, reduction: int, slope: float = 0.01):
        super().__init__()
        if channels % reduction:
            raise ValueError(f"reduction {reduction} must divide channels {channels}")
        self.fc1 = nn.Conv2d(channels, channels // reduction, kernel_size=1, bias=False)
        self.fc2 = nn.Conv2d(channels // reduction, channels, kernel_size=1, bias=False)
        self.act = nn.LeakyReLU(slope)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        avg = x.mean(dim=(-2, -1), keepdim=True)
        mx = x.amax(dim=(-2, -1), keepdim=True)
        bottleneck = lambda d: self.fc2(self.act(self.fc1(d)))  # noqa: E731
        return torch.sigmoid(bottleneck(avg) + bottleneck(mx))


class SpatialGate(nn.Module):
    """Spatial gate: channel-wise mean and max maps, concatenated, one 7x7
    convolution, sigmoid."""

    def __init__(self, kernel_size: int = 7):
        super().__init__()
        self.conv = nn.Conv2d(2, 1, kernel_size, padding=kernel_size // 2, bias=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        mean = x.mean(dim=-3, keepdim=True)
        mx = x.amax(dim=-3, keepdim=True)
        return torch.sigmoid(self.conv(torch.cat([mean, mx], dim=-3)))


class CBAMBlock(nn.Module):
    """Channel gate then spatial gate, each broadcast-multiplied in."""

    def __init__(self, channels: int, reduction: int, slope: float = 0.01):
        super().__init__()
        self.channel = ChannelGate(channels, reduction, slope)
        self.spatial = SpatialGate()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x * self.channel(x)
        return x * self.spatial(x)


class CoordinateAttention(nn.Module):
    """Directionally factorized attention: pooling along height and width,
    a joint bottleneck encoding, and two sigmoid-gated projections producing
    (C, H, 1) and (C, 1, W) weight maps."""

    def __init__(self, channels: int, reduction: int, slope: float = 0.01):
        super().__init__()
        if channels % reduction:
            raise ValueError(f"reduction {reduction} must divide channels {channels}")
        mid = channels // reduction
        self.encode = nn.Conv2d(channels, mid, kernel_size=1, bias=False)
        self.norm = group_norm(mid)
        self.act = nn.LeakyReLU(slope)
        self.project_h = nn.Conv2d(mid, channels, kernel_size=1, bias=True)
        self.project_w = nn.Conv2d(mid, channels, kernel_size=1, bias=True)

    def gates(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h, w = x.shape[-2], x.shape[-1]
        pool_h = x.mean(dim=-1, keepdim=True)  # (B, C, H, 1)
        pool_w = x.mean(dim=-2, keepdim=True)  # (B, C, 1, W)
        joint = torch.cat([pool_h, pool_w.transpose(-1, -2)], dim=-2)  # (B, C, H+W, 1)
        encoded = self.act(self.norm(self.encode(joint)))
        enc_h, enc_w = torch.split(encoded, [h, w], dim=-2)
        gate_h = torch.sigmoid(self.project_h(enc_h))  # (B, C, H, 1)
        gate_w = torch.sigmoid(self.project_w(enc_w.transpose(-1, -2)))  # (B, C, 1, W)
        return gate_h, gate_w

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        gate_h, gate_w = self.gates(x)
        return x * gate_h * gate_w
