"""
FourierState serialization: CSV records (n_1..n_d, re, im) and a versioned binary container.

Container layout (little endian):
    b"FSTATE" | version u8 | d u8 | count u64 | alphas d*f64 | c_bound f64
    | modes count*d*i64 | coeffs count*c128
"""
import csv
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from spectral.state import FourierState
from spectral.torus import IrrationalTorus
from utils.errors import UsageError


logger = logging.getLogger(__name__)

MAGIC = b"FSTATE"
VERSION = 1
_HEADER = struct.Struct("<BBQ")

PathLike = Union[str, Path]


def csv_header(d: int) -> list:
    return [f"n{j + 1}" for j in range(d)] + ["re", "im"]


def write_state_csv(state: FourierState, path: PathLike) -> None:
    """Write one row per mode; floats use repr so the round trip is bit-exact."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(state.d))
        for n, c in zip(state.modes, state.coeffs):
            writer.writerow([int(v) for v in n] + [repr(float(c.real)), repr(float(c.imag))])


def read_state_csv(path: PathLike, torus: IrrationalTorus) -> FourierState:
    """
    Read a CSV written by write_state_csv.

    Raises:
        UsageError: If the header does not match the torus dimension
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != csv_header(torus.d):
            raise UsageError(f"Unexpected state CSV header {header} for d={torus.d}")
        modes, coeffs = [], []
        for row in reader:
            if not row:
                continue
            modes.append([int(v) for v in row[:torus.d]])
            coeffs.append(complex(float(row[torus.d]), float(row[torus.d + 1])))
    if not modes:
        return FourierState.zero(torus)
    return FourierState(torus, np.array(modes, dtype=np.int64), np.array(coeffs, dtype=np.complex128))


def dumps_state(state: FourierState) -> bytes:
    torus = state.torus
    parts = [
        MAGIC,
        _HEADER.pack(VERSION, torus.d, len(state)),
        np.asarray(torus.alphas, dtype="<f8").tobytes(),
        np.asarray([torus.c_bound], dtype="<f8").tobytes(),
        np.ascontiguousarray(state.modes, dtype="<i8").tobytes(),
        np.ascontiguousarray(state.coeffs, dtype="<c16").tobytes(),
    ]
    return b"".join(parts)


def loads_state(payload: bytes) -> FourierState:
    """
    Decode a container produced by dumps_state.

    Raises:
        UsageError: On a bad magic, unknown version or truncated payload
    """
    if not payload.startswith(MAGIC):
        raise UsageError("Not a FourierState container (bad magic)")
    offset = len(MAGIC)
    try:
        version, d, count = _HEADER.unpack_from(payload, offset)
    except struct.error:
        raise UsageError("Truncated FourierState container header")
    if version != VERSION:
        raise UsageError(f"Unsupported FourierState container version {version}")
    offset += _HEADER.size

    expected = offset + 8 * d + 8 + 8 * d * count + 16 * count
    if len(payload) != expected:
        raise UsageError(f"FourierState container has {len(payload)} bytes, expected {expected}")

    alphas = np.frombuffer(payload, dtype="<f8", count=d, offset=offset)
    offset += 8 * d
    c_bound = float(np.frombuffer(payload, dtype="<f8", count=1, offset=offset)[0])
    offset += 8
    modes = np.frombuffer(payload, dtype="<i8", count=d * count, offset=offset).reshape(count, d)
    offset += 8 * d * count
    coeffs = np.frombuffer(payload, dtype="<c16", count=count, offset=offset)

    torus = IrrationalTorus(tuple(float(a) for a in alphas), c_bound=c_bound)
    return FourierState(torus, modes.copy(), coeffs.copy())


def save_state(state: FourierState, path: PathLike) -> None:
    Path(path).write_bytes(dumps_state(state))
    logger.debug(f"Saved state snapshot to {path}", extra={"modes": len(state)})


def load_state(path: PathLike) -> FourierState:
    return loads_state(Path(path).read_bytes())
