"""Versioned binary checkpoint container.

File layout: 8-byte magic+version, 8-byte little-endian header length, UTF-8
JSON header, then raw little-endian tensor blocks at the offsets the header
records.  Parameters and optimizer moments round-trip bit-exactly, so a
resumed run reproduces the uninterrupted one in full precision.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import torch

if TYPE_CHECKING:  # pragma: no cover
    from .loop import HistoryRow, TrainConfig

__all__ = [
    "Checkpoint",
    "snapshot",
    "save_checkpoint",
    "load_checkpoint",
    "CorruptCheckpointError",
    "CheckpointVersionError",
    "CheckpointMismatchError",
]

MAGIC = b"HSBC"
CHECKPOINT_VERSION = 1

_DTYPES = {"<f4": torch.float32, "<f8": torch.float64}


class CorruptCheckpointError(ValueError):
    """File is not a readable checkpoint (bad magic, truncated, junk header)."""


class CheckpointVersionError(ValueError):
    """Checkpoint was written by an incompatible format version."""


class CheckpointMismatchError(ValueError):
    """Checkpoint does not belong to the configuration trying to use it."""


# Config keys that must agree between a checkpoint and the run resuming it.
_MATCH_KEYS = (
    "arch", "loss", "batch_size", "accumulation_steps", "precision", "seed",
    "lr", "beta1", "beta2", "optimizer_eps", "scheduler_factor",
    "scheduler_patience", "scheduler_min_lr", "restart_fraction",
    "restart_mode", "weight_mode",
)


def config_to_dict(config: "TrainConfig") -> dict:
    return {
        "arch": config.arch.to_dict(),
        "loss": {
            "ce_coefficient": config.loss.ce_coefficient,
            "dice_coefficient": config.loss.dice_coefficient,
            "epsilon": config.loss.epsilon,
        },
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "accumulation_steps": config.accumulation_steps,
        "precision": config.precision,
        "seed": config.seed,
        "lr": config.lr,
        "beta1": config.beta1,
        "beta2": config.beta2,
        "optimizer_eps": config.optimizer_eps,
        "scheduler_factor": config.scheduler_factor,
        "scheduler_patience": config.scheduler_patience,
        "scheduler_min_lr": config.scheduler_min_lr,
        "restart_fraction": config.restart_fraction,
        "restart_mode": config.restart_mode,
        "weight_mode": config.weight_mode,
        "dataset_path": config.dataset_path,
        "dataset_name": config.dataset_name,
    }


@dataclass
class Checkpoint:
    epoch: int
    params: dict[str, torch.Tensor]
    opt_m: list[torch.Tensor]
    opt_s: list[torch.Tensor]
    opt_step: int
    scheduler: dict
    config: dict
    history: list
    provenance: dict = field(default_factory=dict)
    version: int = CHECKPOINT_VERSION

    def check_matches(self, config: "TrainConfig") -> None:
        other = config_to_dict(config)
        for key in _MATCH_KEYS:
            if self.config.get(key) != other.get(key):
                raise CheckpointMismatchError(
                    f"checkpoint/config mismatch on {key!r}: "
                    f"{self.config.get(key)!r} != {other.get(key)!r}"
                )

    @property
    def arch_dict(self) -> dict:
        return self.config["arch"]


def snapshot(model, opt_state, sched, epoch, config, history, provenance) -> Checkpoint:
    """Deep-copy the live training state into a checkpoint."""
    return Checkpoint(
        epoch=epoch,
        params={name: p.detach().clone() for name, p in model.named_parameters()},
        opt_m=[m.clone() for m in opt_state.m],
        opt_s=[s.clone() for s in opt_state.s],
        opt_step=opt_state.step,
        scheduler=sched.to_dict(),
        config=config_to_dict(config),
        history=[row for row in history],
        provenance=dict(provenance),
    )


def _np_dtype_tag(t: torch.Tensor) -> str:
    if t.dtype == torch.float32:
        return "<f4"
    if t.dtype == torch.float64:
        return "<f8"
    raise ValueError(f"unsupported checkpoint dtype {t.dtype}")


def _history_to_json(history: list) -> list[dict]:
    return [
        {
            "epoch": r.epoch,
            "train_loss": r.train_loss,
            "val_loss": r.val_loss,
            "lr": r.lr,
            "val_miou": r.val_miou,
        }
        for r in history
    ]


def _history_from_json(rows: list[dict]) -> list:
    from .loop import HistoryRow

    return [
        HistoryRow(
            epoch=r["epoch"], train_loss=r["train_loss"], val_loss=r["val_loss"],
            lr=r["lr"], val_miou=r["val_miou"],
        )
        for r in rows
    ]


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    tensors: list[tuple[str, torch.Tensor]] = []
    tensors.extend((f"param:{name}", t) for name, t in ckpt.params.items())
    tensors.extend((f"m:{i}", t) for i, t in enumerate(ckpt.opt_m))
    tensors.extend((f"s:{i}", t) for i, t in enumerate(ckpt.opt_s))
    entries = []
    offset = 0
    blobs = []
    for name, t in tensors:
        array = np.ascontiguousarray(t.detach().numpy())
        raw = array.astype(_np_dtype_tag(t), copy=False).tobytes()
        entries.append(
            {
                "name": name,
                "dtype": _np_dtype_tag(t),
                "shape": list(t.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blobs.append(raw)
        offset += len(raw)
    header = {
        "version": ckpt.version,
        "epoch": ckpt.epoch,
        "opt_step": ckpt.opt_step,
        "scheduler": ckpt.scheduler,
        "config": ckpt.config,
        "history": _history_to_json(ckpt.history),
        "provenance": ckpt.provenance,
        "tensors": entries,
        "blob_bytes": offset,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", ckpt.version))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(path: str | Path) -> Checkpoint:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise CorruptCheckpointError(f"corrupt checkpoint: {path} is not a checkpoint file")
    version = struct.unpack("<I", data[4:8])[0]
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )
    header_len = struct.unpack("<Q", data[8:16])[0]
    if len(data) < 16 + header_len:
        raise CorruptCheckpointError("corrupt checkpoint: truncated header")
    try:
        header = json.loads(data[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpointError(f"corrupt checkpoint: unreadable header ({exc})") from exc
    blob = data[16 + header_len :]
    if len(blob) != header["blob_bytes"]:
        raise CorruptCheckpointError(
            f"corrupt checkpoint: expected {header['blob_bytes']} tensor bytes, found {len(blob)}"
        )
    params: dict[str, torch.Tensor] = {}
    moments: dict[str, list] = {"m": [], "s": []}
    for entry in header["tensors"]:
        raw = blob[entry["offset"] : entry["offset"] + entry["nbytes"]]
        array = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
        tensor = torch.from_numpy(array)
        kind, _, rest = entry["name"].partition(":")
        if kind == "param":
            params[rest] = tensor
        else:
            moments[kind].append((int(rest), tensor))
    opt_m = [t for _, t in sorted(moments["m"])]
    opt_s = [t for _, t in sorted(moments["s"])]
    return Checkpoint(
        epoch=header["epoch"],
        params=params,
        opt_m=opt_m,
        opt_s=opt_s,
        opt_step=header["opt_step"],
        scheduler=header["scheduler"],
        config=header["config"],
        history=_history_from_json(header["history"]),
        provenance=header.get("provenance", {}),
        version=header["version"],
    )
