"""
Binary checkpoint files.

Layout: 8-byte magic, little-endian u32 header length, UTF-8 JSON header
(``CheckpointHeader``), then every tensor as raw little-endian float64 in
header order.
"""
import logging
import struct
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.core.errors import IncompatibleCheckpoint
from app.models.params import ModelParams, init_params
from app.schemas.checkpoint import CheckpointHeader, TensorEntry
from app.schemas.model import ModelConfig
from app.schemas.sample import SplitMode

logger = logging.getLogger(__name__)

MAGIC = b"MSANCKP\x01"
FORMAT_VERSION = 1
_LENGTH = struct.Struct("<I")


def best_path(path: Union[str, Path]) -> Path:
    """``runs/model.ckpt`` -> ``runs/model.best.ckpt``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.best{path.suffix}")


def save_checkpoint(
    path: Union[str, Path],
    params: ModelParams,
    type_labels: Sequence[str],
    mode: SplitMode = SplitMode.TRANSDUCTIVE,
    seed: int = 0,
    fold: int = 0,
    epoch: int = 0,
    valid_auc: Optional[float] = None,
) -> Path:
    path = Path(path)
    entries = []
    offset = 0
    for name, tensor in params.items():
        entries.append(TensorEntry(name=name, shape=tensor.shape, offset=offset))
        offset += tensor.data.size
    header = CheckpointHeader(
        format_version=FORMAT_VERSION,
        model=params.config,
        type_labels=list(type_labels),
        mode=mode,
        seed=seed,
        fold=fold,
        epoch=epoch,
        valid_auc=valid_auc,
        tensors=entries,
    )
    header_bytes = header.model_dump_json().encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(_LENGTH.pack(len(header_bytes)))
        handle.write(header_bytes)
        for _, tensor in params.items():
            handle.write(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())
    tmp.replace(path)
    logger.debug("wrote checkpoint %s (%d tensors, epoch %d)", path, len(entries), epoch)
    return path


def read_checkpoint(path: Union[str, Path]) -> Tuple[CheckpointHeader, dict]:
    """Header plus a name -> array mapping, without building a model."""
    path = Path(path)
    if not path.is_file():
        raise IncompatibleCheckpoint(f"{path}: checkpoint not found")
    raw = path.read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise IncompatibleCheckpoint(f"{path}: not a checkpoint file (bad magic)")
    start = len(MAGIC) + _LENGTH.size
    if len(raw) < start:
        raise IncompatibleCheckpoint(f"{path}: truncated header")
    (length,) = _LENGTH.unpack_from(raw, len(MAGIC))
    try:
        header = CheckpointHeader.model_validate_json(raw[start:start + length])
    except ValidationError as exc:
        raise IncompatibleCheckpoint(f"{path}: unreadable header ({exc.error_count()} errors)") from exc
    if header.format_version != FORMAT_VERSION:
        raise IncompatibleCheckpoint(f"{path}: format version {header.format_version}, expected {FORMAT_VERSION}")

    payload = np.frombuffer(raw, dtype="<f8", offset=start + length)
    arrays = {}
    for entry in header.tensors:
        size = entry.shape[0] * entry.shape[1]
        if entry.offset + size > payload.size:
            raise IncompatibleCheckpoint(f"{path}: payload too short for {entry.name}")
        arrays[entry.name] = payload[entry.offset:entry.offset + size].reshape(entry.shape).astype(np.float64)
    return header, arrays


def load_checkpoint(
    path: Union[str, Path],
    expected: Optional[ModelConfig] = None,
) -> Tuple[CheckpointHeader, ModelParams]:
    """Rebuild the parameters stored in ``path``.

    When ``expected`` is given the stored model config must match it exactly.
    """
    header, arrays = read_checkpoint(path)
    if expected is not None and header.model != expected:
        raise IncompatibleCheckpoint(
            f"{path}: checkpoint model {header.model.model_dump()} does not match configured {expected.model_dump()}"
        )
    params = init_params(header.model, np.random.default_rng(0))
    params.load_state_dict(arrays)
    return header, params
