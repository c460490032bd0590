"""Core value types for hyperspectral scenes and the spatial-shape helpers
(padding, cropping, subsampling) shared by every other module.

Construction-time checks cover cheap structural invariants (dimensionality,
dtype, positive sizes).  Data-dependent and cross-object invariants
(finiteness, label ranges, shape correspondence) are checked by
:func:`validate_sample`, which reports violations as data instead of raising,
so malformed samples can be inspected rather than rejected at the door.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IGNORE_ID",
    "HsiCube",
    "LabelMap",
    "ClassTaxonomy",
    "DatasetDescriptor",
    "Sample",
    "ValidationResult",
    "validate_sample",
    "pad_to_stride",
    "crop_logits",
    "subsample_spatial",
    "nearest_indices",
    "minmax_scale",
]

# Reserved label value for pixels excluded from training and metrics.
# 8-bit labels cap usable class ids at 254, far above the largest class
# count in scope (19).
IGNORE_ID = 255


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HsiCube:
    """One hyperspectral image: C spectral bands of H x W float32 reflectance.

    ``values`` is band-major then row-major, i.e. a C-contiguous ``(C, H, W)``
    array.
    """

    values: np.ndarray
    wavelength_range_nm: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 3:
            raise ValueError(f"cube values must be (C, H, W), got {values.ndim}D")
        if values.dtype != np.float32:
            raise ValueError(f"cube values must be float32, got {values.dtype}")
        if min(values.shape) < 1:
            raise ValueError(f"cube dims must be positive, got {values.shape}")
        object.__setattr__(self, "values", _freeze(values))
        if self.wavelength_range_nm is not None:
            low, high = self.wavelength_range_nm
            if not low < high:
                raise ValueError(f"wavelength range must satisfy low < high, got ({low}, {high})")
            object.__setattr__(self, "wavelength_range_nm", (float(low), float(high)))

    @property
    def bands(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.values.shape[1], self.values.shape[2]


@dataclass(frozen=True)
class LabelMap:
    """H x W per-pixel class ids (uint8) with 255 reserved as ignore."""

    labels: np.ndarray
    ignore_id: int = IGNORE_ID

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"labels must be (H, W), got {labels.ndim}D")
        if labels.dtype != np.uint8:
            raise ValueError(f"labels must be uint8, got {labels.dtype}")
        if min(labels.shape) < 1:
            raise ValueError(f"label dims must be positive, got {labels.shape}")
        if self.ignore_id != IGNORE_ID:
            raise ValueError(f"ignore_id is fixed at {IGNORE_ID}")
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.labels.shape

    def class_ids(self) -> np.ndarray:
        """Distinct non-ignore ids present in the map, sorted."""
        ids = np.unique(self.labels)
        return ids[ids != self.ignore_id]


@dataclass(frozen=True)
class ClassTaxonomy:
    """Ordered class vocabulary: ids contiguous from 0, unique labels."""

    name: str
    classes: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple((int(i), str(s)) for i, s in self.classes))
        ids = [i for i, _ in self.classes]
        names = [s for _, s in self.classes]
        if ids != list(range(len(ids))) or not ids:
            raise ValueError(f"class ids must be contiguous from 0, got {ids}")
        if len(set(names)) != len(names):
            raise ValueError("class labels must be unique")
        if IGNORE_ID in ids:
            raise ValueError(f"{IGNORE_ID} is reserved for ignore and cannot be a class id")

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def label_of(self, class_id: int) -> str:
        return self.classes[class_id][1]

    def labels(self) -> list[str]:
        return [s for _, s in self.classes]


@dataclass(frozen=True)
class DatasetDescriptor:
    """Shape/vocabulary contract every sample of a dataset must satisfy."""

    name: str
    height: int
    width: int
    bands: int
    num_classes: int
    wavelength_range_nm: tuple[float, float] | None
    declared_image_count: int
    taxonomy: ClassTaxonomy

    def __post_init__(self) -> None:
        for field_name in ("height", "width", "bands", "num_classes"):
            if getattr(self, field_name) < 1:
                raise ValueError(f"{field_name} must be positive")
        if self.taxonomy.num_classes != self.num_classes:
            raise ValueError(
                f"descriptor num_classes {self.num_classes} != taxonomy size {self.taxonomy.num_classes}"
            )

    @property
    def spatial(self) -> tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True)
class Sample:
    """One scene: cube plus its label map.

    The cube/label shape correspondence is deliberately not enforced here;
    :func:`validate_sample` reports it so mismatched pairs remain inspectable.
    """

    id: str
    cube: HsiCube
    labels: LabelMap


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_sample(sample: Sample, descriptor: DatasetDescriptor) -> ValidationResult:
    """Check all sample invariants against a descriptor.

    Pure: same input always yields the same result.  Violations are data,
    not failures.
    """
    v: list[str] = []
    cube, labels = sample.cube, sample.labels
    if not np.isfinite(cube.values).all():
        v.append("cube contains non-finite values")
    if cube.spatial != labels.spatial:
        v.append(f"shape mismatch: cube {cube.spatial} vs labels {labels.spatial}")
    if cube.bands != descriptor.bands:
        v.append(f"band count {cube.bands} != descriptor {descriptor.bands}")
    if cube.spatial != descriptor.spatial:
        v.append(f"cube spatial {cube.spatial} != descriptor {descriptor.spatial}")
    ids = labels.class_ids()
    if ids.size and int(ids.max()) >= descriptor.num_classes:
        bad = ids[ids >= descriptor.num_classes]
        v.append(f"label id out of range: {sorted(int(i) for i in bad)} >= K={descriptor.num_classes}")
    return ValidationResult(tuple(v))


def pad_to_stride(cube: HsiCube, stride: int) -> tuple[HsiCube, tuple[int, int]]:
    """Zero-pad bottom/right so H and W become the smallest multiples of
    ``stride`` that cover the cube.  Returns the padded cube and the original
    extent for later cropping.  Padding bottom/right only keeps pixel (0, 0)
    anchored, making the crop inverse trivial.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    h, w = cube.spatial
    ph = math.ceil(h / stride) * stride
    pw = math.ceil(w / stride) * stride
    if (ph, pw) == (h, w):
        return cube, (h, w)
    padded = np.pad(cube.values, ((0, 0), (0, ph - h), (0, pw - w)))
    return HsiCube(padded, cube.wavelength_range_nm), (h, w)


def crop_logits(logits: np.ndarray, original: tuple[int, int]) -> np.ndarray:
    """Top-left ``original`` window of each class plane; inverse of
    :func:`pad_to_stride` on the spatial extent."""
    h, w = original
    if logits.ndim != 3:
        raise ValueError(f"logits must be (K, H', W'), got {logits.ndim}D")
    if h > logits.shape[1] or w > logits.shape[2]:
        raise ValueError(
            f"invalid crop: requested {(h, w)} exceeds padded {logits.shape[1:]}"
        )
    if h < 1 or w < 1:
        raise ValueError(f"invalid crop: extent must be positive, got {(h, w)}")
    return logits[:, :h, :w]


def nearest_indices(source: int, target: int) -> np.ndarray:
    """Centers-aligned nearest-neighbor source indices for a 1-d resample.

    Index i maps to floor((i + 0.5) * source / target), clipped to the valid
    range.  Cube and labels share this grid so pixel/label correspondence is
    preserved.
    """
    if target < 1 or target > source:
        raise ValueError(f"target {target} must be in [1, source={source}]")
    idx = np.floor((np.arange(target) + 0.5) * (source / target)).astype(np.int64)
    return np.minimum(idx, source - 1)


def subsample_spatial(sample: Sample, target: tuple[int, int]) -> Sample:
    """Nearest-neighbor spatial subsampling of cube and labels together.

    Label ids are gathered, never interpolated, so the output label set is a
    subset of the input's.
    """
    th, tw = target
    h, w = sample.labels.spatial
    if sample.cube.spatial != (h, w):
        raise ValueError("sample cube/labels disagree on spatial dims")
    rows = nearest_indices(h, th)
    cols = nearest_indices(w, tw)
    cube = HsiCube(
        np.ascontiguousarray(sample.cube.values[:, rows[:, None], cols[None, :]]),
        sample.cube.wavelength_range_nm,
    )
    labels = LabelMap(np.ascontiguousarray(sample.labels.labels[rows[:, None], cols[None, :]]))
    return Sample(id=sample.id, cube=cube, labels=labels)


def minmax_scale(cube: HsiCube) -> HsiCube:
    """Optional per-cube min-max scale to [0, 1].

    Not applied anywhere by default: the pipeline keeps raw spectra untouched.
    Constant cubes scale to all zeros.
    """
    lo = float(cube.values.min())
    hi = float(cube.values.max())
    if hi == lo:
        return HsiCube(np.zeros_like(cube.values), cube.wavelength_range_nm)
    scaled = ((cube.values - lo) / (hi - lo)).astype(np.float32)
    return HsiCube(scaled, cube.wavelength_range_nm)
