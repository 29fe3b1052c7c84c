"""
Plain-text file formats for matrices, sign vectors and sparse signals.

    obcs-matrix v1 m n      then m lines of n floats
    obcs-signs v1 m         then m lines of +1 / -1
    obcs-signal v1 n s      then s lines "index value" (1-based index)
"""
import logging
from pathlib import Path

import numpy as np

from obcs.errors import FileFormatError
from obcs.model import SparseSignal

logger = logging.getLogger(__name__)

MATRIX_TAG = "obcs-matrix"
SIGNS_TAG = "obcs-signs"
SIGNAL_TAG = "obcs-signal"
VERSION = "v1"


def _read_header(lines, tag, n_fields, path):
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    parts = lines[0].split()
    if len(parts) != 2 + n_fields or parts[0] != tag or parts[1] != VERSION:
        raise FileFormatError(f"{path}: expected header '{tag} {VERSION}' with {n_fields} sizes, got '{lines[0].strip()}'")
    try:
        sizes = [int(p) for p in parts[2:]]
    except ValueError:
        raise FileFormatError(f"{path}: non-integer sizes in header")
    if any(size < 0 for size in sizes):
        raise FileFormatError(f"{path}: negative size in header")
    return sizes


def _body(path):
    text = Path(path).read_text()
    return [line for line in text.splitlines() if line.strip()]


def write_matrix(path, A):
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    with open(path, "w") as f:
        f.write(f"{MATRIX_TAG} {VERSION} {m} {n}\n")
        np.savetxt(f, A, fmt="%.17g", delimiter=" ")
    logger.info("wrote %dx%d matrix to %s", m, n, path)


def read_matrix(path):
    lines = _body(path)
    m, n = _read_header(lines, MATRIX_TAG, 2, path)
    rows = lines[1:]
    if len(rows) != m:
        raise FileFormatError(f"{path}: header declares {m} rows, found {len(rows)}")
    try:
        A = np.array([[float(v) for v in row.split()] for row in rows], dtype=float).reshape(m, n)
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}")
    return np.asfortranarray(A)


def write_signs(path, y):
    y = np.asarray(y, dtype=float)
    with open(path, "w") as f:
        f.write(f"{SIGNS_TAG} {VERSION} {len(y)}\n")
        for v in y:
            f.write("+1\n" if v > 0 else "-1\n")
    logger.info("wrote %d signs to %s", len(y), path)


def read_signs(path):
    lines = _body(path)
    (m,) = _read_header(lines, SIGNS_TAG, 1, path)
    entries = [line.strip() for line in lines[1:]]
    if len(entries) != m:
        raise FileFormatError(f"{path}: header declares {m} signs, found {len(entries)}")
    lookup = {"+1": 1.0, "1": 1.0, "-1": -1.0}
    bad = [e for e in entries if e not in lookup]
    if bad:
        raise FileFormatError(f"{path}: invalid sign entry '{bad[0]}'")
    return np.array([lookup[e] for e in entries])


def write_signal(path, signal):
    with open(path, "w") as f:
        f.write(f"{SIGNAL_TAG} {VERSION} {signal.n} {signal.s}\n")
        for i in signal.support:
            f.write(f"{i + 1} {signal.values[i]:.17g}\n")
    logger.info("wrote %d-sparse signal to %s", signal.s, path)


def read_signal(path):
    lines = _body(path)
    n, s = _read_header(lines, SIGNAL_TAG, 2, path)
    entries = lines[1:]
    if len(entries) != s:
        raise FileFormatError(f"{path}: header declares {s} entries, found {len(entries)}")
    values = np.zeros(n)
    support = []
    for line in entries:
        parts = line.split()
        if len(parts) != 2:
            raise FileFormatError(f"{path}: expected 'index value', got '{line.strip()}'")
        try:
            index = int(parts[0]) - 1
            value = float(parts[1])
        except ValueError:
            raise FileFormatError(f"{path}: malformed entry '{line.strip()}'")
        if not 0 <= index < n:
            raise FileFormatError(f"{path}: index {index + 1} outside [1, {n}]")
        values[index] = value
        support.append(index)
    return SparseSignal(values=values, support=support)
