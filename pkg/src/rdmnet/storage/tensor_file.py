"""
TSR1 tensor files.

Layout (all integers little-endian):
    4 bytes  magic ``TSR1``
    u32      ndim (1..8)
    ndim*u32 dims (each >= 1)
    payload  product(dims) float32 values, row-major

Nothing may follow the payload.
"""

import struct
from pathlib import Path

import numpy as np

from rdmnet.autograd.tensor import Tensor
from rdmnet.errors import FormatError, MissingInputError

MAGIC = b"TSR1"
MAX_NDIM = 8
_U32 = struct.Struct("<I")


def encode_tensor(tensor: Tensor) -> bytes:
    """Serialize a tensor; float64 data is stored as float32."""
    shape = tensor.shape
    header = MAGIC + _U32.pack(len(shape)) + b"".join(_U32.pack(d) for d in shape)
    return header + np.ascontiguousarray(tensor.data, dtype="<f4").tobytes()


def decode_tensor_at(data: bytes, offset: int = 0) -> tuple[Tensor, int]:
    """
    Decode one TSR1 record starting at ``offset``.

    Returns:
        The tensor and the offset just past its payload.

    Raises:
        FormatError: On bad magic, bad ndim, zero dims or a truncated record.
    """
    if len(data) - offset < 8:
        raise FormatError("TSR1 record truncated in header")
    if data[offset : offset + 4] != MAGIC:
        raise FormatError(f"bad TSR1 magic {bytes(data[offset:offset + 4])!r}")
    (ndim,) = _U32.unpack_from(data, offset + 4)
    if ndim == 0 or ndim > MAX_NDIM:
        raise FormatError(f"TSR1 ndim must be 1..{MAX_NDIM}, got {ndim}")
    dims_end = offset + 8 + 4 * ndim
    if len(data) < dims_end:
        raise FormatError("TSR1 record truncated in dims")
    dims = struct.unpack_from(f"<{ndim}I", data, offset + 8)
    if any(d == 0 for d in dims):
        raise FormatError(f"TSR1 dims must be >= 1, got {dims}")
    count = 1
    for d in dims:
        count *= d
    payload_end = dims_end + 4 * count
    if len(data) < payload_end:
        raise FormatError(
            f"TSR1 payload truncated: need {4 * count} bytes, have {len(data) - dims_end}"
        )
    values = np.frombuffer(data, dtype="<f4", count=count, offset=dims_end)
    array = values.astype(np.float32).reshape(dims)
    return Tensor(array, dtype=np.float32), payload_end


def decode_tensor(data: bytes) -> Tensor:
    """Decode a complete TSR1 file; trailing bytes are rejected."""
    tensor, end = decode_tensor_at(data)
    if end != len(data):
        raise FormatError(f"TSR1 file has {len(data) - end} trailing bytes")
    return tensor


def save_tensor(path: Path, tensor: Tensor) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tensor(tensor))


def load_tensor(path: Path) -> Tensor:
    if not path.is_file():
        raise MissingInputError(f"tensor file not found: {path}")
    return decode_tensor(path.read_bytes())
