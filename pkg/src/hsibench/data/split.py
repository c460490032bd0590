"""Deterministic train/val/test assignment."""

from __future__ import annotations

import numpy as np

from .canonical import DatasetManifest

__all__ = ["split_dataset", "allocate_counts"]


def allocate_counts(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder allocation of n items to three ratio buckets."""
    exact = [n * r for r in ratios]
    base = [int(x) for x in exact]
    remainder = n - sum(base)
    by_frac = sorted(range(3), key=lambda i: (-(exact[i] - base[i]), i))
    for i in by_frac[:remainder]:
        base[i] += 1
    return tuple(base)  # type: ignore[return-value]


def split_dataset(
    manifest: DatasetManifest, ratios: tuple[float, float, float], seed: int
) -> DatasetManifest:
    """Reassign splits deterministically.

    Assignment is keyed on sorted sample ids, so it is independent of the
    order samples were written in.
    """
    if any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios} (sum {sum(ratios)})")
    ids = sorted(manifest.sample_ids)
    if len(ids) < 3:
        raise ValueError(f"need at least 3 samples to form 3 splits, have {len(ids)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_train, n_val, _ = allocate_counts(len(ids), ratios)
    splits: dict[str, str] = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            part = "train"
        elif rank < n_train + n_val:
            part = "val"
        else:
            part = "test"
        splits[ids[idx]] = part
    return DatasetManifest(
        descriptor=manifest.descriptor,
        sample_ids=manifest.sample_ids,
        splits=splits,
        format_version=manifest.format_version,
    )
