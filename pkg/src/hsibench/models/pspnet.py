"""Pyramid-pooling segmentation network: encoder to 1/8 resolution, multi-bin
global context module, classification at 1/8, bilinear upsample to input."""

from __future__ import annotations

import torch
from torch import nn

from .common import ArchSpec, SegmentationModel, group_norm

__all__ = ["PSPNet", "PyramidPooling"]


def _conv_block(in_ch: int, out_ch: int, slope: float, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False),
        group_norm(out_ch),
        nn.LeakyReLU(slope),
    )


class PyramidPooling(nn.Module):
    """Adaptive average pooling at several bin counts, 1x1-projected and
    upsampled back, concatenated with the input features."""

    def __init__(self, channels: int, slope: float, bins: tuple[int, ...] = (1, 2, 3, 6)):
        super().__init__()
        self.bins = bins
        branch_ch = channels // len(bins)
        self.branches = nn.ModuleList(
            [
                nn.Sequential(
                    nn.AdaptiveAvgPool2d(b),
                    nn.Conv2d(channels, branch_ch, 1, bias=False),
                    group_norm(branch_ch),
                    nn.LeakyReLU(slope),
                )
                for b in bins
            ]
        )
        self.out_channels = channels + branch_ch * len(bins)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        outs = [x]
        for branch in self.branches:
            pooled = branch(x)
            outs.append(
                nn.functional.interpolate(pooled, size=x.shape[-2:], mode="bilinear", align_corners=False)
            )
        return torch.cat(outs, dim=-3)


class PSPNet(SegmentationModel):
    def __init__(self, spec: ArchSpec, bins: tuple[int, ...] = (1, 2, 3, 6)):
        super().__init__(spec, stride=8)
        w = spec.base_width
        slope = spec.activation_slope
        self.encoder = nn.Sequential(
            _conv_block(spec.in_channels, w, slope, stride=2),
            _conv_block(w, w, slope),
            _conv_block(w, 2 * w, slope, stride=2),
            _conv_block(2 * w, 2 * w, slope),
            _conv_block(2 * w, 4 * w, slope, stride=2),
            _conv_block(4 * w, 4 * w, slope),
        )
        self.pyramid = PyramidPooling(4 * w, slope, bins)
        self.fuse = _conv_block(self.pyramid.out_channels, 2 * w, slope)
        self.head = nn.Conv2d(2 * w, spec.num_classes, kernel_size=1)

    def _forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = self.fuse(self.pyramid(self.encoder(x)))
        logits = self.head(feats)
        return nn.functional.interpolate(logits, size=x.shape[-2:], mode="bilinear", align_corners=False)
