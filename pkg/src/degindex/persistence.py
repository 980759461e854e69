"""Dataset ingestion (fvecs/ivecs), graph files, and deterministic subsampling.

Graph file layout, all little-endian::

    magic    4s   b"DEG1"
    version  u32
    metric   u8   0 = sqeuclidean, 1 = angular
    dim      u32
    count    u64
    degree   u32
    weights  u8   1 if edge weights follow each neighbor list

then per vertex: ``dim`` f32 features, ``degree`` u32 neighbor ids (ascending)
and, when weights are present, ``degree`` f32 weights.
"""
import os
import struct

import numpy as np

from .errors import (
    BadMagic,
    CorruptHeader,
    NTooLarge,
    TruncatedFile,
    VersionMismatch,
)
from .graph import DegGraph
from .metric import METRIC_NAMES, FeatureStore

MAGIC = b"DEG1"
VERSION = 1
HEADER = struct.Struct("<4sIBIQIB")


# --- vecs -----------------------------------------------------------------


def _scan_records(raw, dim):
    """Walk records one by one to name the first defect."""
    rec = 4 + 4 * dim
    off = 0
    while off < len(raw):
        if len(raw) - off < 4:
            raise TruncatedFile(f"dangling {len(raw) - off} bytes at offset {off}")
        d = struct.unpack_from("<i", raw, off)[0]
        if d != dim:
            raise CorruptHeader(f"record at offset {off} declares dim {d}, expected {dim}")
        if len(raw) - off < rec:
            raise TruncatedFile(f"record at offset {off} is cut short")
        off += rec


def _read_vecs(path, payload_dtype, limit=None):
    with open(path, "rb") as f:
        head = f.read(4)
        if len(head) == 0:
            return np.zeros((0, 0), dtype=payload_dtype)
        if len(head) < 4:
            raise TruncatedFile(f"{path}: incomplete dimension field")
        dim = struct.unpack("<i", head)[0]
        if dim <= 0:
            raise CorruptHeader(f"{path}: non-positive dimension {dim}")
        rec = 4 + 4 * dim
        rest = f.read() if limit is None else f.read(max(int(limit), 0) * rec - 4)
    raw = head + rest
    if limit is not None and int(limit) <= 0:
        return np.zeros((0, dim), dtype=payload_dtype)
    if len(raw) % rec:
        _scan_records(raw, dim)
    words = np.frombuffer(raw, dtype="<i4").reshape(-1, dim + 1)
    if np.any(words[:, 0] != dim):
        _scan_records(raw, dim)
    return words[:, 1:].view(payload_dtype).astype(payload_dtype.newbyteorder("="), copy=True)


def read_fvecs(path, limit=None):
    """Float32 matrix from an .fvecs file; ``limit`` keeps only the first rows."""
    return _read_vecs(path, np.dtype("<f4"), limit)


def read_ivecs(path, limit=None):
    """Int32 matrix from an .ivecs file."""
    return _read_vecs(path, np.dtype("<i4"), limit)


def _write_vecs(path, X, dtype):
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError("expected a 2-d array")
    n, dim = X.shape
    out = np.empty((n, dim + 1), dtype="<i4")
    out[:, 0] = dim
    out[:, 1:] = np.ascontiguousarray(X, dtype=dtype).view("<i4")
    with open(path, "wb") as f:
        f.write(out.tobytes())


def write_fvecs(path, X):
    _write_vecs(path, X, "<f4")


def write_ivecs(path, X):
    _write_vecs(path, X, "<i4")


# --- graph files ----------------------------------------------------------------


def _record_dtype(dim, d, weights):
    fields = [("features", "<f4", (dim,)), ("neighbors", "<u4", (d,))]
    if weights:
        fields.append(("weights", "<f4", (d,)))
    return np.dtype(fields)


def save_graph(graph, path, include_weights=True):
    if not graph.is_settled():
        raise ValueError("only settled graphs can be saved")
    if include_weights and not graph.has_weights:
        raise ValueError("graph has no weights to save")
    n, dim, d = graph.size, graph.store.dim, graph.d
    rec = np.zeros(n, dtype=_record_dtype(dim, d, include_weights))
    rec["features"] = graph.store.buffer[:n]
    rec["neighbors"] = graph.nbrs[:n]
    if include_weights:
        rec["weights"] = graph.wts[:n]
    header = HEADER.pack(MAGIC, VERSION, graph.metric, dim, n, d, int(include_weights))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(rec.tobytes())
    os.replace(tmp, path)


def load_graph(path):
    """Read a graph file. Without stored weights the graph is search-only."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < HEADER.size:
        if raw[:4] != MAGIC[: len(raw[:4])]:
            raise BadMagic(f"{path}: not a graph file")
        raise TruncatedFile(f"{path}: header is cut short")
    magic, version, metric, dim, n, d, weights = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"{path}: version {version}, expected {VERSION}")
    if metric not in METRIC_NAMES or dim == 0 or weights not in (0, 1) or d < 4 or d % 2:
        raise CorruptHeader(f"{path}: invalid header fields")
    dtype = _record_dtype(dim, d, bool(weights))
    expected = HEADER.size + n * dtype.itemsize
    if len(raw) < expected:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, header implies {expected}")
    if len(raw) > expected:
        raise CorruptHeader(f"{path}: {len(raw) - expected} trailing bytes")
    rec = np.frombuffer(raw, dtype=dtype, count=n, offset=HEADER.size)
    nbrs = rec["neighbors"]
    if n and nbrs.max(initial=0) >= n:
        raise CorruptHeader(f"{path}: neighbor id out of range")
    store = FeatureStore.from_array(rec["features"].astype(np.float32), metric=int(metric))
    graph = DegGraph(int(d), store, capacity=max(int(n), 1))
    graph.size = int(n)
    graph.nbrs[:n] = nbrs.astype(np.int32)
    graph.deg[:n] = d
    if weights:
        graph.wts[:n] = rec["weights"]
    else:
        graph.has_weights = False
    return graph


# --- sampling ---------------------------------------------------------------


def subsample(X, n, seed=0):
    """Uniform sample of ``n`` rows without replacement; returns (rows, source ids)."""
    X = X.vectors if isinstance(X, FeatureStore) else np.asarray(X)
    if n > len(X) or n < 0:
        raise NTooLarge(f"cannot draw {n} rows from {len(X)}")
    ids = np.random.default_rng(seed).choice(len(X), size=n, replace=False)
    return np.ascontiguousarray(X[ids], dtype=np.float32), ids
