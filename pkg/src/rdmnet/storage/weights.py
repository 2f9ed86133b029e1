"""
Weight container files.

Layout (little-endian):
    u32  entry count
    per entry, names in ascending order:
        u16    name length in bytes
        bytes  UTF-8 name
        TSR1   tensor record (see ``tensor_file``)

Sorted names make the bytes canonical for a given set of parameters.
"""

import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from rdmnet.autograd.tensor import Array, Tensor
from rdmnet.errors import FormatError, MissingInputError
from rdmnet.storage.tensor_file import decode_tensor_at, encode_tensor

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")


def encode_weights(named: Mapping[str, Array]) -> bytes:
    """Serialize a name -> array map with names sorted ascending."""
    parts = [_U32.pack(len(named))]
    for name in sorted(named):
        encoded = name.encode("utf-8")
        if not encoded or len(encoded) > 0xFFFF:
            raise FormatError(f"weight name must be 1..65535 UTF-8 bytes: {name!r}")
        parts.append(_U16.pack(len(encoded)))
        parts.append(encoded)
        parts.append(encode_tensor(Tensor(np.asarray(named[name]), dtype=np.float32)))
    return b"".join(parts)


def decode_weights(data: bytes) -> dict[str, Array]:
    """
    Parse a weight container.

    Raises:
        FormatError: On truncation, invalid UTF-8, empty or duplicate names,
            a bad embedded tensor, or trailing bytes.
    """
    if len(data) < 4:
        raise FormatError("weight file truncated in entry count")
    (count,) = _U32.unpack_from(data, 0)
    offset = 4
    named: dict[str, Array] = {}
    for index in range(count):
        if len(data) - offset < 2:
            raise FormatError(f"weight entry {index} truncated in name length")
        (length,) = _U16.unpack_from(data, offset)
        offset += 2
        if length == 0:
            raise FormatError(f"weight entry {index} has an empty name")
        if len(data) - offset < length:
            raise FormatError(f"weight entry {index} truncated in name")
        try:
            name = data[offset : offset + length].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"weight entry {index} name is not UTF-8") from exc
        offset += length
        if name in named:
            raise FormatError(f"duplicate weight name {name!r}")
        tensor, offset = decode_tensor_at(data, offset)
        named[name] = tensor.data
    if offset != len(data):
        raise FormatError(f"weight file has {len(data) - offset} trailing bytes")
    return named


def save_weights(path: Path, named: Mapping[str, Array]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_weights(named))


def load_weights(path: Path) -> dict[str, Array]:
    if not path.is_file():
        raise MissingInputError(f"weights file not found: {path}")
    return decode_weights(path.read_bytes())
