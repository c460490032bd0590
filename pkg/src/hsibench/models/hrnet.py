"""Small three-stream high-resolution network: parallel branches at 1/4, 1/8,
and 1/16 resolution with repeated cross-resolution fusion, so a
high-resolution representation is maintained end to end."""

from __future__ import annotations

import torch
from torch import nn

from .common import ArchSpec, SegmentationModel, group_norm

__all__ = ["HRNetSmall"]


def _conv_block(in_ch: int, out_ch: int, slope: float, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False),
        group_norm(out_ch),
        nn.LeakyReLU(slope),
    )


class _Fusion(nn.Module):
    """Exchange unit: every output stream sums projected/resized versions of
    every input stream (1x1 conv + bilinear up for coarser inputs, strided
    3x3 convs for finer ones)."""

    def __init__(self, widths: tuple[int, ...], slope: float):
        super().__init__()
        n = len(widths)
        self.paths = nn.ModuleList()
        for dst in range(n):
            row = nn.ModuleList()
            for src in range(n):
                if src == dst:
                    row.append(nn.Identity())
                elif src < dst:
                    # finer -> coarser: one strided conv per scale gap
                    steps = []
                    ch = widths[src]
                    for step in range(dst - src):
                        out = widths[dst] if step == dst - src - 1 else ch
                        steps.append(nn.Conv2d(ch, out, 3, stride=2, padding=1, bias=False))
                        steps.append(group_norm(out))
                        ch = out
                    row.append(nn.Sequential(*steps))
                else:
                    # coarser -> finer: project then upsample in forward
                    row.append(
                        nn.Sequential(nn.Conv2d(widths[src], widths[dst], 1, bias=False), group_norm(widths[dst]))
                    )
            self.paths.append(row)
        self.act = nn.LeakyReLU(slope)

    def forward(self, streams: list[torch.Tensor]) -> list[torch.Tensor]:
        outs = []
        for dst, row in enumerate(self.paths):
            total = None
            for src, path in enumerate(row):
                y = path(streams[src])
                if src > dst:
                    y = nn.functional.interpolate(
                        y, size=streams[dst].shape[-2:], mode="bilinear", align_corners=False
                    )
                total = y if total is None else total + y
            outs.append(self.act(total))
        return outs


class HRNetSmall(SegmentationModel):
    def __init__(self, spec: ArchSpec, num_stages: int = 2):
        super().__init__(spec, stride=16)
        w = spec.base_width
        slope = spec.activation_slope
        self.widths = (max(w // 2, 1), w, 2 * w)
        self.stem = nn.Sequential(
            _conv_block(spec.in_channels, self.widths[0], slope, stride=2),
            _conv_block(self.widths[0], self.widths[0], slope, stride=2),
        )
        self.to_mid = _conv_block(self.widths[0], self.widths[1], slope, stride=2)
        self.to_low = _conv_block(self.widths[1], self.widths[2], slope, stride=2)
        self.stages = nn.ModuleList()
        for _ in range(num_stages):
            self.stages.append(
                nn.ModuleList(
                    [
                        nn.Sequential(*[_conv_block(ch, ch, slope) for _ in range(2)])
                        for ch in self.widths
                    ]
                )
            )
        self.fusions = nn.ModuleList([_Fusion(self.widths, slope) for _ in range(num_stages)])
        total = sum(self.widths)
        self.head = nn.Sequential(
            _conv_block(total, w, slope),
            nn.Conv2d(w, spec.num_classes, kernel_size=1),
        )

    def _forward(self, x: torch.Tensor) -> torch.Tensor:
        high = self.stem(x)  # 1/4
        mid = self.to_mid(high)  # 1/8
        low = self.to_low(mid)  # 1/16
        streams = [high, mid, low]
        for blocks, fusion in zip(self.stages, self.fusions):
            streams = [block(s) for block, s in zip(blocks, streams)]
            streams = fusion(streams)
        size = streams[0].shape[-2:]
        merged = torch.cat(
            [streams[0]]
            + [
                nn.functional.interpolate(s, size=size, mode="bilinear", align_corners=False)
                for s in streams[1:]
            ],
            dim=-3,
        )
        logits = self.head(merged)
        return nn.functional.interpolate(logits, size=x.shape[-2:], mode="bilinear", align_corners=False)
