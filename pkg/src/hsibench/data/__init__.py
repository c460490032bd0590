"""Dataset I/O: canonical on-disk format, relabeling, statistics, splits, and
the synthetic scene generator."""

from .canonical import (
    CanonicalDataset,
    ChecksumError,
    DatasetManifest,
    MissingFileError,
    TruncatedFileError,
    UnsupportedVersionError,
    read_canonical,
    write_canonical,
)
from .relabel import RelabelMap, UnmappedIdError, load_relabel_map, relabel, save_relabel_map
from .split import split_dataset
from .stats import PixelStats, compute_pixel_stats
from .synthetic import SyntheticDataset, generate_synthetic

__all__ = [
    "CanonicalDataset",
    "ChecksumError",
    "DatasetManifest",
    "MissingFileError",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "read_canonical",
    "write_canonical",
    "RelabelMap",
    "UnmappedIdError",
    "load_relabel_map",
    "relabel",
    "save_relabel_map",
    "split_dataset",
    "PixelStats",
    "compute_pixel_stats",
    "SyntheticDataset",
    "generate_synthetic",
]
