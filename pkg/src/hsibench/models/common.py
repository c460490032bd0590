"""Shared model-zoo machinery: architecture specs, seeded deterministic
initialization, and the uniform forward contract (arbitrary C in, K class
planes out, spatial dims preserved via pad/crop at the family's stride).

Normalization is GroupNorm throughout: per-sample statistics keep forward
results independent of batch composition, which gradient-accumulation
equivalence and bit-reproducibility both rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..core import HsiCube

__all__ = [
    "FAMILIES",
    "ArchSpec",
    "ModelHandle",
    "build_model",
    "forward_cube",
    "count_parameters",
    "pad_tensor_to_stride",
    "crop_logits_tensor",
    "group_norm",
    "ChannelMismatchError",
]

FAMILIES = ("unet", "unet_ca", "unet_cbam", "deeplabv3plus", "pspnet", "hrnet")


class ChannelMismatchError(ValueError):
    """Input band count differs from the spec the model was built with."""


@dataclass(frozen=True)
class ArchSpec:
    """Everything needed to build one model deterministically."""

    family: str
    in_channels: int
    num_classes: int
    base_width: int = 32
    depth: int = 4
    activation_slope: float = 0.01
    attention_reduction: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.in_channels < 1 or self.num_classes < 1:
            raise ValueError("in_channels and num_classes must be >= 1")
        if self.base_width < 1 or self.depth < 1:
            raise ValueError("base_width and depth must be >= 1")
        if self.attention_reduction < 1:
            raise ValueError("attention_reduction must be >= 1")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "in_channels": self.in_channels,
            "num_classes": self.num_classes,
            "base_width": self.base_width,
            "depth": self.depth,
            "activation_slope": self.activation_slope,
            "attention_reduction": self.attention_reduction,
            "seed": self.seed,
        }


def group_norm(channels: int, max_groups: int = 8) -> nn.GroupNorm:
    groups = min(max_groups, channels)
    while channels % groups:
        groups -= 1
    return nn.GroupNorm(groups, channels)


def pad_tensor_to_stride(x: torch.Tensor, stride: int) -> tuple[torch.Tensor, tuple[int, int]]:
    """Tensor twin of core.pad_to_stride: zero-pad bottom/right to multiples
    of ``stride``.  Works on (..., H, W)."""
    h, w = int(x.shape[-2]), int(x.shape[-1])
    ph = math.ceil(h / stride) * stride
    pw = math.ceil(w / stride) * stride
    if (ph, pw) == (h, w):
        return x, (h, w)
    return torch.nn.functional.pad(x, (0, pw - w, 0, ph - h)), (h, w)


def crop_logits_tensor(logits: torch.Tensor, original: tuple[int, int]) -> torch.Tensor:
    h, w = original
    if h > logits.shape[-2] or w > logits.shape[-1]:
        raise ValueError(f"invalid crop: {original} exceeds {tuple(logits.shape[-2:])}")
    return logits[..., :h, :w]


class SegmentationModel(nn.Module):
    """Base class enforcing the uniform contract.

    Subclasses implement ``_forward`` on inputs whose spatial dims are
    multiples of ``stride``; padding and cropping happen here so every family
    accepts arbitrary odd dimensions.
    """

    def __init__(self, spec: ArchSpec, stride: int):
        super().__init__()
        self.spec = spec
        self.stride = stride

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-3] != self.spec.in_channels:
            raise ChannelMismatchError(
                f"expected {self.spec.in_channels} input channels, got {x.shape[-3]}"
            )
        x, original = pad_tensor_to_stride(x, self.stride)
        logits = self._forward(x)
        return crop_logits_tensor(logits, original)

    def _forward(self, x: torch.Tensor) -> torch.Tensor:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class ModelHandle:
    """A built architecture plus its spec and shape requirements."""

    module: SegmentationModel
    spec: ArchSpec

    @property
    def stride(self) -> int:
        return self.module.stride

    @property
    def parameter_count(self) -> int:
        return count_parameters(self.module)


def count_parameters(module: nn.Module) -> int:
    """Exact count of trainable scalars."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


def _reset_parameters(module: nn.Module, seed: int) -> None:
    # Fan-in-scaled uniform init, drawn from one seeded generator in module
    # registration order, so identical specs yield identical parameter bytes.
    gen = torch.Generator().manual_seed(seed)
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
            fan_in, _ = nn.init._calculate_fan_in_and_fan_out(m.weight)
            bound = 1.0 / math.sqrt(fan_in)
            with torch.no_grad():
                m.weight.uniform_(-bound, bound, generator=gen)
                if m.bias is not None:
                    m.bias.uniform_(-bound, bound, generator=gen)
        elif isinstance(m, nn.GroupNorm):
            with torch.no_grad():
                m.weight.fill_(1.0)
                m.bias.fill_(0.0)


def build_model(spec: ArchSpec) -> ModelHandle:
    """Build one of the six families with seeded weights, no pretraining."""
    from .deeplab import DeepLabV3Plus
    from .hrnet import HRNetSmall
    from .pspnet import PSPNet
    from .unet import UNet

    if spec.family == "unet":
        module: SegmentationModel = UNet(spec, attention=None)
    elif spec.family == "unet_ca":
        module = UNet(spec, attention="ca")
    elif spec.family == "unet_cbam":
        module = UNet(spec, attention="cbam")
    elif spec.family == "deeplabv3plus":
        module = DeepLabV3Plus(spec)
    elif spec.family == "pspnet":
        module = PSPNet(spec)
    else:
        module = HRNetSmall(spec)
    _reset_parameters(module, spec.seed)
    return ModelHandle(module=module, spec=spec)


def forward_cube(handle: ModelHandle, cube: HsiCube) -> torch.Tensor:
    """Run one cube through the model: (C, H, W) in, logits (K, H, W) out."""
    if cube.bands != handle.spec.in_channels:
        raise ChannelMismatchError(
            f"expected {handle.spec.in_channels} input channels, got {cube.bands}"
        )
    dtype = next(handle.module.parameters()).dtype
    x = torch.from_numpy(np.array(cube.values)).to(dtype).unsqueeze(0)
    return handle.module(x).squeeze(0)
