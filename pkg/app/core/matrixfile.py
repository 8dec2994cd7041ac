"""
Reading and writing matrices.

Binary layout: 8-byte magic b'HSUMTX01', rows and cols as little-endian
uint64, then rows * cols little-endian float64 values in column-major
order. Files ending in .csv are read as headerless comma-separated rows.
"""
import struct
from pathlib import Path

import numpy as np

from core.exceptions import (
    BadMagic, MalformedCsv, NonFiniteInput, TruncatedFile
)

MAGIC = b'HSUMTX01'
HEADER = struct.Struct('<QQ')
HEADER_SIZE = len(MAGIC) + HEADER.size


def write_matrix(path, M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput(f'Refusing to write NaN/Inf to {path}.')
    rows, cols = M.shape
    with open(path, 'wb') as fh:
        fh.write(MAGIC)
        fh.write(HEADER.pack(rows, cols))
        fh.write(M.astype('<f8').tobytes(order='F'))


def _read_binary(path):
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        if not MAGIC.startswith(data[:len(MAGIC)]):
            raise BadMagic(f'{path} is not a matrix file.')
        raise TruncatedFile(f'{path} is shorter than the header.')
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagic(f'{path} does not start with {MAGIC!r}.')
    rows, cols = HEADER.unpack_from(data, len(MAGIC))
    expected = HEADER_SIZE + 8 * rows * cols
    if len(data) != expected:
        raise TruncatedFile(
            f'{path} holds {len(data)} bytes, header announces {expected}.'
        )
    payload = np.frombuffer(data, dtype='<f8', offset=HEADER_SIZE)
    return payload.reshape((rows, cols), order='F').astype(np.float64)


def read_matrix(path):
    """Load a matrix file, or a CSV file when the name ends in .csv."""
    if str(path).lower().endswith('.csv'):
        try:
            M = np.loadtxt(path, delimiter=',', ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise MalformedCsv(f'{path}: {exc}') from exc
    else:
        M = _read_binary(path)
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput(f'{path} contains NaN or Inf entries.')
    return M
