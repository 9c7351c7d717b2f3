"""Flat archive of named tensors

Layout, all integers little-endian:

    HSTCKPT 1\\n
    repeated until end of file:
        u32   name length in bytes
        bytes UTF-8 name
        u64   axis count
        u64   axis lengths (one per axis)
        f32   values, C order
"""
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from utils.errors import DataFormatError

logger = logging.getLogger(__name__)

HEADER = b"HSTCKPT 1\n"
FORMAT_VERSION = 1


def save_checkpoint(path: Union[str, Path], tensors: Dict[str, np.ndarray]) -> Path:
    """
    Write named tensors as 32-bit values

    Args:
        path: Destination file
        tensors: name -> array, e.g. Module.state_dict()

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chunks = [HEADER]
    for name, value in tensors.items():
        value = np.asarray(value)
        encoded = name.encode("utf-8")
        chunks.append(np.array([len(encoded)], dtype="<u4").tobytes())
        chunks.append(encoded)
        chunks.append(np.array([value.ndim] + list(value.shape), dtype="<u8").tobytes())
        chunks.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    path.write_bytes(b"".join(chunks))
    logger.info(f"Checkpoint saved: {path} ({len(tensors)} tensors)")
    return path


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Read a checkpoint written by save_checkpoint

    Raises:
        FileNotFoundError: if the file is missing
        DataFormatError: on a bad header or a truncated entry
    """
    path = Path(path)
    blob = path.read_bytes()
    if not blob.startswith(HEADER):
        first_line = blob.split(b"\n", 1)[0][:32]
        raise DataFormatError(f"{path}: not a checkpoint (header {first_line!r}, expected {HEADER.strip()!r})")

    tensors: Dict[str, np.ndarray] = {}
    offset = len(HEADER)

    def take(count: int, what: str) -> bytes:
        nonlocal offset
        if offset + count > len(blob):
            raise DataFormatError(f"{path}: truncated {what}: expected {count} bytes, "
                                  f"{len(blob) - offset} available")
        chunk = blob[offset:offset + count]
        offset += count
        return chunk

    while offset < len(blob):
        name_len = int(np.frombuffer(take(4, "name length"), dtype="<u4")[0])
        name = take(name_len, "name").decode("utf-8")
        ndim = int(np.frombuffer(take(8, f"{name} axis count"), dtype="<u8")[0])
        shape = tuple(int(n) for n in np.frombuffer(take(8 * ndim, f"{name} axes"), dtype="<u8"))
        count = int(np.prod(shape)) if shape else 1
        values = np.frombuffer(take(4 * count, f"{name} values"), dtype="<f4")
        tensors[name] = values.reshape(shape).astype(np.float32)

    logger.info(f"Checkpoint loaded: {path} ({len(tensors)} tensors)")
    return tensors
