"""Canonical on-disk dataset format.

Layout of a dataset directory:

    manifest.json   descriptor, format version, sample list, split map
    <id>.cube       C*H*W float32 little-endian, band-major then row-major
    <id>.labels     H*W uint8, row-major
    <id>.sha256     optional sidecar, sha256sum-style lines for both files

The format is trivially parseable in any language and round-trips bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ..core import ClassTaxonomy, DatasetDescriptor, HsiCube, LabelMap, Sample, validate_sample

__all__ = [
    "FORMAT_VERSION",
    "DatasetManifest",
    "CanonicalDataset",
    "write_canonical",
    "read_canonical",
    "UnsupportedVersionError",
    "MissingFileError",
    "TruncatedFileError",
    "ChecksumError",
]

FORMAT_VERSION = 1

SPLITS = ("train", "val", "test")


class UnsupportedVersionError(ValueError):
    """Manifest declares a format version this reader does not understand."""


class MissingFileError(FileNotFoundError):
    """A file referenced by the manifest is absent."""


class TruncatedFileError(ValueError):
    """A sample file is shorter or longer than the descriptor implies."""


class ChecksumError(ValueError):
    """A sample file does not match its recorded sha256 digest."""


@dataclass(frozen=True)
class DatasetManifest:
    """Full description of a canonical dataset directory."""

    descriptor: DatasetDescriptor
    sample_ids: tuple[str, ...]
    splits: dict[str, str]
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("sample ids must be unique")
        extra = set(self.splits) - set(self.sample_ids)
        if extra:
            raise ValueError(f"split map references unknown ids: {sorted(extra)}")
        missing = set(self.sample_ids) - set(self.splits)
        if missing:
            raise ValueError(f"split map missing ids: {sorted(missing)}")
        bad = {s for s in self.splits.values() if s not in SPLITS}
        if bad:
            raise ValueError(f"unknown split names: {sorted(bad)}")

    def ids_in_split(self, split: str) -> list[str]:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [sid for sid in self.sample_ids if self.splits[sid] == split]


def _taxonomy_to_json(tax: ClassTaxonomy) -> dict:
    return {"name": tax.name, "classes": [[i, s] for i, s in tax.classes]}


def _taxonomy_from_json(obj: dict) -> ClassTaxonomy:
    return ClassTaxonomy(name=obj["name"], classes=tuple((i, s) for i, s in obj["classes"]))


def _descriptor_to_json(d: DatasetDescriptor) -> dict:
    return {
        "name": d.name,
        "height": d.height,
        "width": d.width,
        "bands": d.bands,
        "num_classes": d.num_classes,
        "wavelength_range_nm": list(d.wavelength_range_nm) if d.wavelength_range_nm else None,
        "declared_image_count": d.declared_image_count,
        "taxonomy": _taxonomy_to_json(d.taxonomy),
    }


def _descriptor_from_json(obj: dict) -> DatasetDescriptor:
    rng = obj.get("wavelength_range_nm")
    return DatasetDescriptor(
        name=obj["name"],
        height=obj["height"],
        width=obj["width"],
        bands=obj["bands"],
        num_classes=obj["num_classes"],
        wavelength_range_nm=tuple(rng) if rng else None,
        declared_image_count=obj["declared_image_count"],
        taxonomy=_taxonomy_from_json(obj["taxonomy"]),
    )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_canonical(
    samples: Iterable[Sample],
    descriptor: DatasetDescriptor,
    directory: str | Path,
    splits: dict[str, str] | None = None,
    checksums: bool = True,
) -> DatasetManifest:
    """Write samples into ``directory`` in canonical form.

    Every sample must validate against the descriptor.  When ``splits`` is
    None all samples land in "train"; callers normally reassign via
    :func:`hsibench.data.split.split_dataset` on the returned manifest.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ids: list[str] = []
    for sample in samples:
        result = validate_sample(sample, descriptor)
        if not result.ok:
            raise ValueError(f"sample {sample.id!r} invalid: {'; '.join(result.violations)}")
        cube_bytes = np.ascontiguousarray(sample.cube.values, dtype="<f4").tobytes()
        label_bytes = np.ascontiguousarray(sample.labels.labels, dtype=np.uint8).tobytes()
        (directory / f"{sample.id}.cube").write_bytes(cube_bytes)
        (directory / f"{sample.id}.labels").write_bytes(label_bytes)
        if checksums:
            sidecar = (
                f"{_sha256(cube_bytes)}  {sample.id}.cube\n"
                f"{_sha256(label_bytes)}  {sample.id}.labels\n"
            )
            (directory / f"{sample.id}.sha256").write_text(sidecar)
        ids.append(sample.id)
    split_map = dict(splits) if splits is not None else {sid: "train" for sid in ids}
    manifest = DatasetManifest(descriptor=descriptor, sample_ids=tuple(ids), splits=split_map)
    write_manifest(manifest, directory)
    return manifest


def write_manifest(manifest: DatasetManifest, directory: str | Path) -> None:
    """(Re)write manifest.json; used after split reassignment."""
    payload = {
        "format_version": manifest.format_version,
        "descriptor": _descriptor_to_json(manifest.descriptor),
        "samples": [
            {"id": sid, "cube": f"{sid}.cube", "labels": f"{sid}.labels"}
            for sid in manifest.sample_ids
        ],
        "splits": manifest.splits,
    }
    (Path(directory) / "manifest.json").write_text(json.dumps(payload, indent=2))


class CanonicalDataset:
    """Lazy per-sample access to a canonical dataset directory.

    Sample files are verified on load: size against the descriptor, digest
    against the sidecar when one is present.
    """

    def __init__(self, directory: Path, manifest: DatasetManifest):
        self._dir = directory
        self.manifest = manifest

    def __len__(self) -> int:
        return len(self.manifest.sample_ids)

    def ids(self) -> tuple[str, ...]:
        return self.manifest.sample_ids

    def load(self, sample_id: str) -> Sample:
        d = self.manifest.descriptor
        cube_path = self._dir / f"{sample_id}.cube"
        label_path = self._dir / f"{sample_id}.labels"
        cube_bytes = cube_path.read_bytes()
        label_bytes = label_path.read_bytes()
        expected_cube = d.bands * d.height * d.width * 4
        if len(cube_bytes) != expected_cube:
            raise TruncatedFileError(
                f"{cube_path.name}: expected {expected_cube} bytes, found {len(cube_bytes)}"
            )
        if len(label_bytes) != d.height * d.width:
            raise TruncatedFileError(
                f"{label_path.name}: expected {d.height * d.width} bytes, found {len(label_bytes)}"
            )
        sidecar = self._dir / f"{sample_id}.sha256"
        if sidecar.exists():
            recorded = {}
            for line in sidecar.read_text().splitlines():
                if line.strip():
                    digest, name = line.split(None, 1)
                    recorded[name.strip()] = digest
            for name, data in ((cube_path.name, cube_bytes), (label_path.name, label_bytes)):
                if name in recorded and _sha256(data) != recorded[name]:
                    raise ChecksumError(f"checksum failure for {name}")
        values = np.frombuffer(cube_bytes, dtype="<f4").reshape(d.bands, d.height, d.width)
        labels = np.frombuffer(label_bytes, dtype=np.uint8).reshape(d.height, d.width)
        return Sample(
            id=sample_id,
            cube=HsiCube(values.astype(np.float32, copy=False), d.wavelength_range_nm),
            labels=LabelMap(labels),
        )

    def __iter__(self) -> Iterator[Sample]:
        for sid in self.manifest.sample_ids:
            yield self.load(sid)

    def iter_split(self, split: str) -> Iterator[Sample]:
        for sid in self.manifest.ids_in_split(split):
            yield self.load(sid)


def read_canonical(directory: str | Path) -> tuple[DatasetManifest, CanonicalDataset]:
    """Open a canonical dataset directory.

    Verifies the format version and that every referenced file exists; byte
    sizes and checksums are verified lazily on sample load.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingFileError(f"no manifest.json in {directory}")
    payload = json.loads(manifest_path.read_text())
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported version {version!r}, this reader handles {FORMAT_VERSION}"
        )
    descriptor = _descriptor_from_json(payload["descriptor"])
    entries = payload["samples"]
    for entry in entries:
        for key in ("cube", "labels"):
            if not (directory / entry[key]).exists():
                raise MissingFileError(f"missing sample file {entry[key]}")
    manifest = DatasetManifest(
        descriptor=descriptor,
        sample_ids=tuple(e["id"] for e in entries),
        splits=dict(payload["splits"]),
    )
    return manifest, CanonicalDataset(directory, manifest)
