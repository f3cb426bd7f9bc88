"""Binary tensor container and proxy checkpoint files.

Layout, all little-endian: magic ``KECF``, format version u16, dtype
code u8 (1 = float64), rank u8, one u64 per dimension, payload in
column-major order, CRC32 of the payload as u32.  Multiple blocks may be
concatenated in one file; checkpoints store a metadata block followed by
alternating weight and bias blocks per layer.
"""

from __future__ import annotations

import io
import struct
import zlib

import numpy as np

from .errors import (
    BadCrc,
    BadMagic,
    TensorFileError,
    UnsupportedDtype,
    UnsupportedVersion,
)
from .proxy import ProxyLayer, ProxyNetwork

MAGIC = b"KECF"
FORMAT_VERSION = 1
DTYPE_F64 = 1

_ACTIVATION_CODES = {"identity": 0, "relu": 1}
_ACTIVATION_NAMES = {v: k for k, v in _ACTIVATION_CODES.items()}


def write_tensor_stream(fh, array):
    """Append one tensor block to a binary stream."""
    arr = np.asfortranarray(array, dtype=np.float64)
    if arr.ndim > 255:
        raise TensorFileError("rank %d exceeds the format limit" % arr.ndim)
    payload = arr.tobytes(order="F")
    fh.write(MAGIC)
    fh.write(struct.pack("<HBB", FORMAT_VERSION, DTYPE_F64, arr.ndim))
    for dim in arr.shape:
        fh.write(struct.pack("<Q", dim))
    fh.write(payload)
    fh.write(struct.pack("<I", zlib.crc32(payload)))


def read_tensor_stream(fh):
    """Read one tensor block from the stream's current offset."""
    magic = fh.read(4)
    if len(magic) < 4 or magic != MAGIC:
        raise BadMagic("expected magic %r, found %r" % (MAGIC, magic))
    header = fh.read(4)
    if len(header) < 4:
        raise BadCrc("truncated header")
    version, dtype, rank = struct.unpack("<HBB", header)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion("format version %d is not supported" % version)
    if dtype != DTYPE_F64:
        raise UnsupportedDtype("dtype code %d is not supported" % dtype)
    dims = []
    for _ in range(rank):
        raw = fh.read(8)
        if len(raw) < 8:
            raise BadCrc("truncated dimension header")
        dims.append(struct.unpack("<Q", raw)[0])
    count = 1
    for dim in dims:
        count *= dim
    payload = fh.read(8 * count)
    if len(payload) < 8 * count:
        raise BadCrc("truncated payload: expected %d bytes, found %d"
                     % (8 * count, len(payload)))
    stored = fh.read(4)
    if len(stored) < 4:
        raise BadCrc("missing checksum")
    if struct.unpack("<I", stored)[0] != zlib.crc32(payload):
        raise BadCrc("payload checksum mismatch")
    flat = np.frombuffer(payload, dtype="<f8")
    return np.reshape(flat, dims, order="F").copy(order="F")


def write_tensor(path, array):
    """Write one tensor to its own file."""
    with open(path, "wb") as fh:
        write_tensor_stream(fh, array)


def read_tensor(path):
    """Read the first tensor block of a file."""
    with open(path, "rb") as fh:
        return read_tensor_stream(fh)


def read_all_tensors(path):
    """Read every concatenated block in a file."""
    out = []
    with open(path, "rb") as fh:
        data = fh.read()
    stream = io.BytesIO(data)
    while stream.tell() < len(data):
        out.append(read_tensor_stream(stream))
    return out


def save_checkpoint(path, net):
    """Serialize a proxy network: meta block, then per-layer W and b."""
    code = _ACTIVATION_CODES[net.activation]
    with open(path, "wb") as fh:
        write_tensor_stream(fh, np.array([net.beta, float(code),
                                          float(net.depth)]))
        for lay in net.layers:
            write_tensor_stream(fh, lay.weight)
            write_tensor_stream(fh, lay.bias)


def load_checkpoint(path):
    """Rebuild a proxy network from its checkpoint file."""
    blocks = read_all_tensors(path)
    if not blocks or blocks[0].shape != (3,):
        raise TensorFileError("checkpoint lacks a valid metadata block")
    beta, code, depth = blocks[0]
    depth = int(depth)
    if int(code) not in _ACTIVATION_NAMES:
        raise TensorFileError("unknown activation code %d" % int(code))
    if len(blocks) != 1 + 2 * depth:
        raise TensorFileError(
            "checkpoint holds %d blocks but depth %d needs %d"
            % (len(blocks), depth, 1 + 2 * depth)
        )
    layers = []
    for l in range(depth):
        weight = blocks[1 + 2 * l]
        bias = blocks[2 + 2 * l]
        if weight.ndim != 2 or bias.ndim != 1:
            raise TensorFileError("layer %d blocks have wrong ranks" % l)
        layers.append(ProxyLayer(np.ascontiguousarray(weight), bias))
    return ProxyNetwork(layers, float(beta), _ACTIVATION_NAMES[int(code)])
