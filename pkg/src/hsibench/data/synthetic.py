"""Synthetic hyperspectral scene generator for desk-scale experiments.

Each class gets a fixed random spectral signature; scenes are Voronoi cells
around random seed points (polygonal regions, every class present) with a few
random rectangles layered on top.  Pixel spectra are the class signature plus
Gaussian noise, so the scenes are linearly separable in band space for small
sigma.  The generator emits exact ground-truth pixel counts alongside the
samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ClassTaxonomy, DatasetDescriptor, HsiCube, LabelMap, Sample

__all__ = ["SyntheticDataset", "generate_synthetic"]


@dataclass(frozen=True)
class SyntheticDataset:
    descriptor: DatasetDescriptor
    samples: tuple[Sample, ...]
    signatures: np.ndarray  # (K, C) float32
    class_counts: tuple[int, ...]  # ground truth, aggregated over all samples
    per_sample_counts: dict[str, tuple[int, ...]]


def _scene_labels(rng: np.random.Generator, height: int, width: int, k: int) -> np.ndarray:
    # Voronoi partition: one seed point per class, nearest-seed labeling.
    centers = np.stack(
        [rng.uniform(0, height, size=k), rng.uniform(0, width, size=k)], axis=1
    )
    rows = np.arange(height)[:, None, None]
    cols = np.arange(width)[None, :, None]
    dist2 = (rows - centers[:, 0]) ** 2 + (cols - centers[:, 1]) ** 2
    labels = np.argmin(dist2, axis=2).astype(np.uint8)
    # A couple of axis-aligned rectangles for non-convex regions.
    for _ in range(int(rng.integers(1, 4))):
        cls = int(rng.integers(0, k))
        h = int(rng.integers(1, max(2, height // 3) + 1))
        w = int(rng.integers(1, max(2, width // 3) + 1))
        top = int(rng.integers(0, height - h + 1))
        left = int(rng.integers(0, width - w + 1))
        labels[top : top + h, left : left + w] = cls
    return labels


def generate_synthetic(
    seed: int,
    count: int,
    height: int,
    width: int,
    bands: int,
    num_classes: int,
    noise_sigma: float,
) -> SyntheticDataset:
    """Deterministic synthetic dataset: identical arguments, identical bytes."""
    if num_classes > 254:
        raise ValueError(f"classes must be <= 254 (8-bit labels with 255 ignored), got {num_classes}")
    if num_classes < 1 or bands < 1 or count < 1 or height < 1 or width < 1:
        raise ValueError("count, dims, bands, and classes must all be positive")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    signatures = rng.uniform(0.1, 1.0, size=(num_classes, bands)).astype(np.float32)
    taxonomy = ClassTaxonomy(
        name=f"synthetic-{num_classes}",
        classes=tuple((i, f"synth_{i}") for i in range(num_classes)),
    )
    samples: list[Sample] = []
    per_sample: dict[str, tuple[int, ...]] = {}
    totals = np.zeros(num_classes, dtype=np.int64)
    for i in range(count):
        labels = _scene_labels(rng, height, width, num_classes)
        spectra = signatures[labels].transpose(2, 0, 1).astype(np.float64)
        noise = rng.standard_normal(size=(bands, height, width))
        values = (spectra + noise_sigma * noise).astype(np.float32)
        sid = f"s{i:04d}"
        samples.append(Sample(id=sid, cube=HsiCube(values), labels=LabelMap(labels)))
        counts = np.bincount(labels.ravel(), minlength=num_classes)[:num_classes]
        per_sample[sid] = tuple(int(c) for c in counts)
        totals += counts
    descriptor = DatasetDescriptor(
        name=f"synthetic-{seed}",
        height=height,
        width=width,
        bands=bands,
        num_classes=num_classes,
        wavelength_range_nm=None,
        declared_image_count=count,
        taxonomy=taxonomy,
    )
    return SyntheticDataset(
        descriptor=descriptor,
        samples=tuple(samples),
        signatures=signatures,
        class_counts=tuple(int(c) for c in totals),
        per_sample_counts=per_sample,
    )
