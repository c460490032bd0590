"""Six segmentation architectures, all parameterized over band count and
class count with a uniform cube-in/logits-out contract."""

from .attention import CBAMBlock, ChannelGate, CoordinateAttention, SpatialGate
from .common import (
    FAMILIES,
    ArchSpec,
    ChannelMismatchError,
    ModelHandle,
    build_model,
    count_parameters,
    crop_logits_tensor,
    forward_cube,
    pad_tensor_to_stride,
)
from .deeplab import ASPP, DeepLabV3Plus
from .hrnet import HRNetSmall
from .pspnet import PSPNet
from .unet import UNet

__all__ = [
    "FAMILIES",
    "ArchSpec",
    "ChannelMismatchError",
    "ModelHandle",
    "build_model",
    "count_parameters",
    "crop_logits_tensor",
    "forward_cube",
    "pad_tensor_to_stride",
    "ChannelGate",
    "SpatialGate",
    "CBAMBlock",
    "CoordinateAttention",
    "ASPP",
    "DeepLabV3Plus",
    "HRNetSmall",
    "PSPNet",
    "UNet",
]
