"""
VWT 二進位體積格式

    magic  b"VWT1"            4 bytes
    version  uint32 LE
    ndim     uint8
    dims     ndim × uint32 LE
    payload  float32 LE，列優先
"""
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..exceptions import DataFormatError

MAGIC = b"VWT1"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sIB")


def encode_volume(array: np.ndarray) -> bytes:
    """陣列編碼為 VWT bytes（數值量化為 float32）"""
    array = np.asarray(array)
    if not 1 <= array.ndim <= 255:
        raise DataFormatError(f"VWT 只支援 1 到 255 維，收到 {array.ndim} 維")
    if any(d >= 2 ** 32 for d in array.shape):
        raise DataFormatError(f"維度過大: {array.shape}")
    header = _PREFIX.pack(MAGIC, FORMAT_VERSION, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes(order="C")
    return header + payload


def decode_volume(data: bytes, source: str = "<bytes>") -> np.ndarray:
    """
    解碼 VWT bytes

    Returns:
        float32 陣列
    """
    if len(data) < _PREFIX.size:
        raise DataFormatError(f"{source}: 檔案過短，不是 VWT 檔")
    magic, version, ndim = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise DataFormatError(f"{source}: magic {magic!r} 不是 {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{source}: 不支援的 VWT 版本 {version}")
    dims_end = _PREFIX.size + 4 * ndim
    if len(data) < dims_end:
        raise DataFormatError(f"{source}: 維度資訊不完整")
    dims = struct.unpack_from(f"<{ndim}I", data, _PREFIX.size)
    expected = int(np.prod(dims, dtype=np.int64)) * 4
    payload = data[dims_end:]
    if len(payload) != expected:
        raise DataFormatError(f"{source}: 資料長度 {len(payload)} bytes，維度 {dims} 需要 {expected} bytes")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)


def write_volume(path: Union[str, Path], array: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_volume(array))
    return path


def read_volume(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    return decode_volume(path.read_bytes(), source=str(path))
