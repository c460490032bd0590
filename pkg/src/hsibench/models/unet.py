"""Encoder-decoder segmentation network with skip connections, plus the two
attention variants (coordinate attention and channel+spatial attention after
every encoder stage and at the bottleneck)."""

from __future__ import annotations

import torch
from torch import nn

from .attention import CBAMBlock, CoordinateAttention
from .common import ArchSpec, SegmentationModel, group_norm

__all__ = ["UNet", "DoubleConv"]


class DoubleConv(nn.Module):
    """Two 3x3 conv + GroupNorm + LeakyReLU blocks."""

    def __init__(self, in_ch: int, out_ch: int, slope: float):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(in_ch, out_ch, 3, padding=1, bias=False),
            group_norm(out_ch),
            nn.LeakyReLU(slope),
            nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False),
            group_norm(out_ch),
            nn.LeakyReLU(slope),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(x)


def _make_attention(kind: str | None, channels: int, reduction: int, slope: float) -> nn.Module:
    if kind is None:
        return nn.Identity()
    if kind == "ca":
        return CoordinateAttention(channels, reduction, slope)
    if kind == "cbam":
        return CBAMBlock(channels, reduction, slope)
    raise ValueError(f"unknown attention kind {kind!r}")


class UNet(SegmentationModel):
    def __init__(self, spec: ArchSpec, attention: str | None = None):
        super().__init__(spec, stride=2**spec.depth)
        w = spec.base_width
        slope = spec.activation_slope
        widths = [w * 2**i for i in range(spec.depth + 1)]
        self.stem = DoubleConv(spec.in_channels, widths[0], slope)
        self.downs = nn.ModuleList(
            [DoubleConv(widths[i], widths[i + 1], slope) for i in range(spec.depth)]
        )
        self.pool = nn.MaxPool2d(2)
        # One gate per encoder stage; the last sits at the bottleneck.
        self.attention = nn.ModuleList(
            [_make_attention(attention, widths[i], spec.attention_reduction, slope) for i in range(spec.depth + 1)]
        )
        self.ups = nn.ModuleList(
            [nn.ConvTranspose2d(widths[i + 1], widths[i], 2, stride=2) for i in reversed(range(spec.depth))]
        )
        self.decoders = nn.ModuleList(
            [DoubleConv(2 * widths[i], widths[i], slope) for i in reversed(range(spec.depth))]
        )
        self.head = nn.Conv2d(widths[0], spec.num_classes, kernel_size=1)

    def _forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = [self.attention[0](self.stem(x))]
        for i, down in enumerate(self.downs):
            feats.append(self.attention[i + 1](down(self.pool(feats[-1]))))
        x = feats[-1]
        skips = feats[-2::-1]
        for up, dec, skip in zip(self.ups, self.decoders, skips):
            x = dec(torch.cat([skip, up(x)], dim=-3))
        return self.head(x)
