"""Per-class pixel counts and shares over a dataset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..core import IGNORE_ID, ClassTaxonomy, LabelMap, Sample

__all__ = ["PixelStats", "compute_pixel_stats"]


@dataclass(frozen=True)
class PixelStats:
    """Exact integer pixel counts per class plus shares over labeled pixels.

    Ignored pixels are counted separately and never enter the percentages.
    """

    taxonomy: ClassTaxonomy
    counts: tuple[int, ...]
    ignored_count: int

    def __post_init__(self) -> None:
        if len(self.counts) != self.taxonomy.num_classes:
            raise ValueError("one count per taxonomy class required")
        if any(c < 0 for c in self.counts) or self.ignored_count < 0:
            raise ValueError("counts must be non-negative")

    @property
    def labeled_total(self) -> int:
        return sum(self.counts)

    @property
    def has_labeled_pixels(self) -> bool:
        return self.labeled_total > 0

    def shares_percent(self) -> tuple[float, ...] | None:
        """Per-class share of labeled pixels in percent; None when nothing is
        labeled (shares are undefined then)."""
        total = self.labeled_total
        if total == 0:
            return None
        return tuple(100.0 * c / total for c in self.counts)


def compute_pixel_stats(
    dataset: Iterable[Sample | LabelMap], taxonomy: ClassTaxonomy
) -> PixelStats:
    """Stream label maps into exact per-class counts.

    Precondition: everything is already relabeled into ``taxonomy`` (ids
    >= K and != ignore are rejected).
    """
    k = taxonomy.num_classes
    counts = np.zeros(k, dtype=np.int64)
    ignored = 0
    seen = 0
    for item in dataset:
        labels = item.labels.labels if isinstance(item, Sample) else item.labels
        seen += 1
        flat = labels.ravel()
        hist = np.bincount(flat, minlength=256)
        bad = np.nonzero(hist[k:IGNORE_ID])[0]
        if bad.size:
            raise ValueError(f"label id(s) {sorted(int(b) + k for b in bad)} outside taxonomy of size {k}")
        counts += hist[:k]
        ignored += int(hist[IGNORE_ID])
    if seen == 0:
        raise ValueError("empty dataset: no label maps to count")
    return PixelStats(taxonomy=taxonomy, counts=tuple(int(c) for c in counts), ignored_count=ignored)
