"""Dilated-convolution segmentation network: plain convolutional encoder (no
pretrained backbone), multi-rate atrous spatial pyramid, and a decoder that
fuses low-level features before upsampling to full resolution."""

from __future__ import annotations

import torch
from torch import nn

from .common import ArchSpec, SegmentationModel, group_norm

__all__ = ["DeepLabV3Plus", "ASPP"]


def _conv_block(in_ch: int, out_ch: int, slope: float, stride: int = 1, kernel: int = 3) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=kernel // 2, bias=False),
        group_norm(out_ch),
        nn.LeakyReLU(slope),
    )


class ASPP(nn.Module):
    """Atrous spatial pyramid: parallel dilated branches plus an optional
    image-level pooling branch, concatenated and linearly projected.

    The branch list and the projection convolution stay exposed so the
    degenerate configuration (all rates 1, pooling off) can be verified to
    collapse into a parallel sum of unit-rate convolutions.
    """

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        slope: float,
        rates: tuple[int, ...] = (1, 6, 12, 18),
        use_global_pool: bool = True,
    ):
        super().__init__()
        self.rates = rates
        self.use_global_pool = use_global_pool
        branches = []
        for rate in rates:
            if rate == 1:
                branches.append(_conv_block(in_ch, out_ch, slope, kernel=1))
            else:
                branches.append(
                    nn.Sequential(
                        nn.Conv2d(in_ch, out_ch, 3, padding=rate, dilation=rate, bias=False),
                        group_norm(out_ch),
                        nn.LeakyReLU(slope),
                    )
                )
        self.branches = nn.ModuleList(branches)
        if use_global_pool:
            self.pool_branch = nn.Sequential(
                nn.AdaptiveAvgPool2d(1),
                nn.Conv2d(in_ch, out_ch, 1, bias=False),
                nn.LeakyReLU(slope),
            )
        n_branches = len(rates) + (1 if use_global_pool else 0)
        self.project = nn.Conv2d(n_branches * out_ch, out_ch, 1, bias=True)
        self.project_norm = group_norm(out_ch)
        self.act = nn.LeakyReLU(slope)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        outs = [branch(x) for branch in self.branches]
        if self.use_global_pool:
            pooled = self.pool_branch(x)
            outs.append(pooled.expand(-1, -1, x.shape[-2], x.shape[-1]))
        return self.act(self.project_norm(self.project(torch.cat(outs, dim=-3))))


class DeepLabV3Plus(SegmentationModel):
    def __init__(
        self,
        spec: ArchSpec,
        aspp_rates: tuple[int, ...] = (1, 6, 12, 18),
        aspp_global_pool: bool = True,
    ):
        super().__init__(spec, stride=16)
        w = spec.base_width
        slope = spec.activation_slope
        self.stem = nn.Sequential(
            _conv_block(spec.in_channels, w, slope, stride=2),
            _conv_block(w, w, slope),
        )
        self.layer1 = nn.Sequential(_conv_block(w, 2 * w, slope, stride=2), _conv_block(2 * w, 2 * w, slope))
        self.layer2 = nn.Sequential(_conv_block(2 * w, 4 * w, slope, stride=2), _conv_block(4 * w, 4 * w, slope))
        self.layer3 = nn.Sequential(_conv_block(4 * w, 8 * w, slope, stride=2), _conv_block(8 * w, 8 * w, slope))
        self.aspp = ASPP(8 * w, 4 * w, slope, rates=aspp_rates, use_global_pool=aspp_global_pool)
        self.low_proj = _conv_block(2 * w, w, slope, kernel=1)
        self.fuse = nn.Sequential(
            _conv_block(4 * w + w, 4 * w, slope),
            _conv_block(4 * w, 2 * w, slope),
        )
        self.head = nn.Conv2d(2 * w, spec.num_classes, kernel_size=1)

    def _forward(self, x: torch.Tensor) -> torch.Tensor:
        low = self.layer1(self.stem(x))  # 1/4 resolution
        high = self.aspp(self.layer3(self.layer2(low)))  # 1/16
        up = nn.functional.interpolate(high, size=low.shape[-2:], mode="bilinear", align_corners=False)
        fused = self.fuse(torch.cat([up, self.low_proj(low)], dim=-3))
        logits = self.head(fused)
        return nn.functional.interpolate(logits, size=x.shape[-2:], mode="bilinear", align_corners=False)
