"""Feature storage and the distance function shared by every other module.

Distances are accumulated in float64 and rounded to float32, so a value
computed here is bit-identical to the edge weight stored for the same pair.
"""
import numba
import numpy as np

from .errors import DimensionMismatch, UnknownVertex

SQEUCLIDEAN = 0
ANGULAR = 1

METRICS = {"sqeuclidean": SQEUCLIDEAN, "l2": SQEUCLIDEAN, "angular": ANGULAR}
METRIC_NAMES = {SQEUCLIDEAN: "sqeuclidean", ANGULAR: "angular"}


def metric_code(metric):
    if isinstance(metric, (int, np.integer)):
        if int(metric) not in METRIC_NAMES:
            raise ValueError(f"unknown metric code {metric}")
        return int(metric)
    try:
        return METRICS[metric.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown metric {metric!r}, expected one of {sorted(METRICS)}") from None


@numba.njit(cache=True, nogil=True)
def dist(a, b, metric):
    if metric == SQEUCLIDEAN:
        acc = 0.0
        for i in range(a.shape[0]):
            t = np.float64(a[i]) - np.float64(b[i])
            acc += t * t
        return np.float32(acc)
    dot = 0.0
    na = 0.0
    nb = 0.0
    for i in range(a.shape[0]):
        x = np.float64(a[i])
        y = np.float64(b[i])
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 and nb == 0.0:
        return np.float32(0.0)
    if na == 0.0 or nb == 0.0:
        return np.float32(1.0)
    # sqrt(na * nb) instead of sqrt(na) * sqrt(nb) keeps dist(a, a) exactly 0
    r = 1.0 - dot / np.sqrt(na * nb)
    if r < 0.0:
        r = 0.0
    return np.float32(r)


@numba.njit(cache=True, nogil=True)
def dist_to_all(q, feats, n, metric):
    out = np.empty(n, dtype=np.float32)
    for i in range(n):
        out[i] = dist(q, feats[i], metric)
    return out


class FeatureStore:
    """Append-only matrix of float32 feature vectors plus the configured metric.

    Rows live in an over-allocated buffer so appends are amortized O(m).
    """

    def __init__(self, dim, metric="sqeuclidean", capacity=16):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.metric = metric_code(metric)
        self._data = np.zeros((max(int(capacity), 1), self.dim), dtype=np.float32)
        self._count = 0

    @classmethod
    def from_array(cls, X, metric="sqeuclidean"):
        X = np.ascontiguousarray(X, dtype=np.float32)
        if X.ndim != 2 or X.shape[1] == 0:
            raise DimensionMismatch(f"expected a 2-d array, got shape {X.shape}")
        store = cls(X.shape[1], metric, capacity=max(len(X), 1))
        store._data[: len(X)] = X
        store._count = len(X)
        return store

    def __len__(self):
        return self._count

    @property
    def metric_name(self):
        return METRIC_NAMES[self.metric]

    @property
    def vectors(self):
        """Read-only view of the stored rows."""
        v = self._data[: self._count]
        v.flags.writeable = False
        return v

    @property
    def buffer(self):
        # full backing array, used by the compiled kernels
        return self._data

    def reserve(self, capacity):
        if capacity > self._data.shape[0]:
            grown = np.zeros((capacity, self.dim), dtype=np.float32)
            grown[: self._count] = self._data[: self._count]
            self._data = grown

    def append_vector(self, row):
        row = np.asarray(row, dtype=np.float32).ravel()
        if row.shape[0] != self.dim:
            raise DimensionMismatch(f"row has {row.shape[0]} values, store dim is {self.dim}")
        if self._count == self._data.shape[0]:
            self.reserve(2 * self._data.shape[0])
        self._data[self._count] = row
        self._count += 1
        return self._count - 1

    def extend(self, X):
        X = np.asarray(X, dtype=np.float32)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected rows of length {self.dim}, got shape {X.shape}")
        need = self._count + len(X)
        if need > self._data.shape[0]:
            self.reserve(max(need, 2 * self._data.shape[0]))
        self._data[self._count : need] = X
        first = self._count
        self._count = need
        return np.arange(first, need)

    def _resolve(self, x):
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < self._count:
                raise UnknownVertex(f"vertex {x} not in store of size {self._count}")
            return self._data[x]
        x = np.asarray(x, dtype=np.float32).ravel()
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"vector has {x.shape[0]} values, store dim is {self.dim}")
        return x

    def distance(self, a, b):
        """Distance between two operands, each a vertex id or a raw vector."""
        return float(dist(self._resolve(a), self._resolve(b), self.metric))


def distance(store, a, b):
    return store.distance(a, b)
