"""Relabeling source taxonomies into the consolidated vocabulary.

Map files are plain text, one ``source_id = target_id | ignore`` line per
class, so the shipped defaults can be edited to match whatever conversion
produced the canonical dataset.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import IGNORE_ID, LabelMap

__all__ = ["RelabelMap", "UnmappedIdError", "relabel", "load_relabel_map", "save_relabel_map"]


class UnmappedIdError(ValueError):
    """Labels contain a source id outside the map's domain."""


@dataclass(frozen=True)
class RelabelMap:
    """Total map from source class ids to target ids (None means ignore)."""

    source_taxonomy: str
    target_taxonomy: str
    mapping: dict[int, int | None]

    def __post_init__(self) -> None:
        for src, dst in self.mapping.items():
            if not 0 <= src < IGNORE_ID:
                raise ValueError(f"source id {src} out of uint8 class range")
            if dst is not None and not 0 <= dst < IGNORE_ID:
                raise ValueError(f"target id {dst} out of uint8 class range")

    @staticmethod
    def identity(taxonomy: str, num_classes: int) -> RelabelMap:
        return RelabelMap(taxonomy, taxonomy, {i: i for i in range(num_classes)})


def relabel(labels: LabelMap, rmap: RelabelMap) -> LabelMap:
    """Pointwise application of the map; ignore pixels stay ignored."""
    lut = np.full(256, IGNORE_ID, dtype=np.int16)
    lut[:] = -1
    lut[IGNORE_ID] = IGNORE_ID
    for src, dst in rmap.mapping.items():
        lut[src] = IGNORE_ID if dst is None else dst
    out = lut[labels.labels]
    if (out < 0).any():
        bad = sorted(int(i) for i in np.unique(labels.labels[out < 0]))
        raise UnmappedIdError(f"unmapped source id(s): {bad}")
    return LabelMap(out.astype(np.uint8))


def load_relabel_map(path: str | Path) -> RelabelMap:
    source = target = ""
    mapping: dict[int, int | None] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "source_taxonomy":
            source = value
        elif key == "target_taxonomy":
            target = value
        else:
            src = int(key)
            if src in mapping:
                raise ValueError(f"{path}:{lineno}: duplicate source id {src}")
            mapping[src] = None if value.lower() == "ignore" else int(value)
    if not source or not target:
        raise ValueError(f"{path}: missing source_taxonomy/target_taxonomy header")
    if not mapping:
        raise ValueError(f"{path}: no mapping entries")
    return RelabelMap(source, target, mapping)


def save_relabel_map(rmap: RelabelMap, path: str | Path) -> None:
    lines = [
        f"source_taxonomy = {rmap.source_taxonomy}",
        f"target_taxonomy = {rmap.target_taxonomy}",
    ]
    for src in sorted(rmap.mapping):
        dst = rmap.mapping[src]
        lines.append(f"{src} = {'ignore' if dst is None else dst}")
    Path(path).write_text("\n".join(lines) + "\n")


def builtin_map_path(name: str) -> Path:
    """Path of a shipped default map (editable configuration, not fixed truth)."""
    path = Path(__file__).resolve().parent.parent / "relabel_maps" / f"{name}.map"
    if not path.exists():
        available = sorted(p.stem for p in path.parent.glob("*.map"))
        raise FileNotFoundError(f"no builtin relabel map {name!r}; available: {available}")
    return path
