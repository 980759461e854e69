"""Even-regular undirected weighted adjacency structure.

Each vertex owns a row of ``d`` slots holding (neighbor id, weight) pairs.
The first ``deg[v]`` slots are in use and kept sorted by neighbor id, so
membership is a binary search and iteration order is deterministic. The
graph only enforces ``deg[v] <= d``; algorithms that hold vertices below
``d`` mid-operation track that themselves.
"""
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import (
    DegreeOverflow,
    DuplicateEdge,
    InconsistentLog,
    MissingEdge,
    OddOrTinyDegree,
    SearchOnlyGraph,
    SelfLoop,
    UnknownVertex,
)
from .metric import FeatureStore

OK = 0
ERR_SELF_LOOP = 1
ERR_DUPLICATE = 2
ERR_OVERFLOW = 3
ERR_MISSING = 4

LOG_ADD = 1
LOG_REMOVE = -1


# --- compiled primitives -------------------------------------------------


@numba.njit(cache=True, nogil=True)
def find_slot(nbrs, deg, u, v):
    lo = 0
    hi = deg[u]
    row = nbrs[u]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = row[mid]
        if x < v:
            lo = mid + 1
        elif x > v:
            hi = mid
        else:
            return mid
    return -1


@numba.njit(cache=True, nogil=True)
def has_edge_k(nbrs, deg, u, v):
    return find_slot(nbrs, deg, u, v) >= 0


@numba.njit(cache=True, nogil=True)
def _insert_half(nbrs, wts, deg, u, v, w):
    k = deg[u]
    j = k
    while j > 0 and nbrs[u, j - 1] > v:
        nbrs[u, j] = nbrs[u, j - 1]
        wts[u, j] = wts[u, j - 1]
        j -= 1
    nbrs[u, j] = v
    wts[u, j] = w
    deg[u] = k + 1


@numba.njit(cache=True, nogil=True)
def _delete_half(nbrs, wts, deg, u, v):
    j = find_slot(nbrs, deg, u, v)
    w = wts[u, j]
    k = deg[u] - 1
    for i in range(j, k):
        nbrs[u, i] = nbrs[u, i + 1]
        wts[u, i] = wts[u, i + 1]
    nbrs[u, k] = -1
    wts[u, k] = 0.0
    deg[u] = k
    return w


@numba.njit(cache=True, nogil=True)
def add_edge_k(nbrs, wts, deg, u, v, w):
    if u == v:
        return ERR_SELF_LOOP
    if find_slot(nbrs, deg, u, v) >= 0:
        return ERR_DUPLICATE
    d = nbrs.shape[1]
    if deg[u] >= d or deg[v] >= d:
        return ERR_OVERFLOW
    _insert_half(nbrs, wts, deg, u, v, w)
    _insert_half(nbrs, wts, deg, v, u, w)
    return OK


@numba.njit(cache=True, nogil=True)
def remove_edge_k(nbrs, wts, deg, u, v):
    if find_slot(nbrs, deg, u, v) < 0:
        return ERR_MISSING, np.float32(0.0)
    w = _delete_half(nbrs, wts, deg, u, v)
    _delete_half(nbrs, wts, deg, v, u)
    return OK, w


@numba.njit(cache=True, nogil=True)
def revert_log_k(nbrs, wts, deg, log_op, log_u, log_v, log_w, length):
    """Undo ``length`` log entries in reverse order. Returns the first failing index or -1."""
    for i in range(length - 1, -1, -1):
        u = log_u[i]
        v = log_v[i]
        if log_op[i] == LOG_ADD:
            j = find_slot(nbrs, deg, u, v)
            if j < 0 or wts[u, j] != log_w[i]:
                return i
            remove_edge_k(nbrs, wts, deg, u, v)
        else:
            if add_edge_k(nbrs, wts, deg, u, v, log_w[i]) != OK:
                return i
    return -1


def _raise_status(status, u, v):
    if status == ERR_SELF_LOOP:
        raise SelfLoop(f"self-loop on vertex {u}")
    if status == ERR_DUPLICATE:
        raise DuplicateEdge(f"edge ({u}, {v}) already present")
    if status == ERR_OVERFLOW:
        raise DegreeOverflow(f"adding ({u}, {v}) would exceed the degree limit")
    if status == ERR_MISSING:
        raise MissingEdge(f"edge ({u}, {v}) not present")


# --- modification log -----------------------------------------------------


@dataclass(frozen=True)
class LogEntry:
    op: int  # LOG_ADD or LOG_REMOVE
    u: int
    v: int
    weight: float


@dataclass
class ModificationLog:
    """Ordered history of edge additions and removals."""

    entries: list = field(default_factory=list)

    def added(self, u, v, w):
        self.entries.append(LogEntry(LOG_ADD, int(u), int(v), float(np.float32(w))))

    def removed(self, u, v, w):
        self.entries.append(LogEntry(LOG_REMOVE, int(u), int(v), float(np.float32(w))))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @classmethod
    def from_arrays(cls, log_op, log_u, log_v, log_w, length):
        log = cls()
        for i in range(length):
            log.entries.append(
                LogEntry(int(log_op[i]), int(log_u[i]), int(log_v[i]), float(log_w[i]))
            )
        return log


# --- graph -----------------------------------------------------------------


def check_degree(d):
    if not isinstance(d, (int, np.integer)) or d < 4 or d % 2:
        raise OddOrTinyDegree(f"degree must be an even integer >= 4, got {d!r}")
    return int(d)


class DegGraph:
    """Undirected weighted graph with a fixed per-vertex degree cap ``d``.

    Parameters
    ----------
    d : int
        Target regularity. Must be even and at least 4.
    store : FeatureStore
        Feature vectors of the vertices; vertex ``i`` is row ``i``.
    """

    def __init__(self, d, store, capacity=None):
        self.d = check_degree(d)
        if not isinstance(store, FeatureStore):
            raise TypeError("store must be a FeatureStore")
        self.store = store
        cap = max(capacity or len(store), d + 1, 1)
        self._nbrs = np.full((cap, self.d), -1, dtype=np.int32)
        self._wts = np.zeros((cap, self.d), dtype=np.float32)
        self._deg = np.zeros(cap, dtype=np.int32)
        self.size = 0
        self.has_weights = True

    # arrays handed to compiled kernels
    @property
    def nbrs(self):
        return self._nbrs

    @property
    def wts(self):
        return self._wts

    @property
    def deg(self):
        return self._deg

    @property
    def vertex_count(self):
        return self.size

    @property
    def metric(self):
        return self.store.metric

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"DegGraph(d={self.d}, vertices={self.size}, edges={self.edge_count()})"

    def reserve(self, capacity):
        cap = self._nbrs.shape[0]
        if capacity <= cap:
            return
        new_cap = max(capacity, 2 * cap)
        nbrs = np.full((new_cap, self.d), -1, dtype=np.int32)
        wts = np.zeros((new_cap, self.d), dtype=np.float32)
        deg = np.zeros(new_cap, dtype=np.int32)
        nbrs[:cap] = self._nbrs
        wts[:cap] = self._wts
        deg[:cap] = self._deg
        self._nbrs, self._wts, self._deg = nbrs, wts, deg

    def add_vertex(self):
        """Register the next stored feature row as an isolated vertex."""
        if self.size >= len(self.store):
            raise UnknownVertex("no unregistered feature row left in the store")
        self.reserve(self.size + 1)
        self.size += 1
        return self.size - 1

    def require_mutable(self):
        if not self.has_weights:
            raise SearchOnlyGraph("graph was loaded without edge weights and is search-only")

    def _check_vertex(self, v):
        if not 0 <= v < self.size:
            raise UnknownVertex(f"vertex {v} not in graph of size {self.size}")

    # --- primitive mutations ---

    def add_edge(self, u, v, w=None):
        self.require_mutable()
        self._check_vertex(u)
        self._check_vertex(v)
        if w is None:
            w = self.store.distance(int(u), int(v))
        status = add_edge_k(self._nbrs, self._wts, self._deg, u, v, np.float32(w))
        _raise_status(status, u, v)

    def remove_edge(self, u, v):
        """Remove (u, v) and return its stored weight."""
        self.require_mutable()
        self._check_vertex(u)
        self._check_vertex(v)
        status, w = remove_edge_k(self._nbrs, self._wts, self._deg, u, v)
        _raise_status(status, u, v)
        return float(w)

    # --- queries ---

    def neighbors(self, v):
        self._check_vertex(v)
        k = self._deg[v]
        ids = self._nbrs[v, :k].tolist()
        if not self.has_weights:
            return [(i, float("nan")) for i in ids]
        return list(zip(ids, self._wts[v, :k].tolist()))

    def neighbor_ids(self, v):
        self._check_vertex(v)
        return self._nbrs[v, : self._deg[v]].copy()

    def weight(self, u, v):
        self._check_vertex(u)
        j = find_slot(self._nbrs, self._deg, u, v)
        if j < 0:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        return float(self._wts[u, j])

    def degree(self, v):
        self._check_vertex(v)
        return int(self._deg[v])

    def degrees(self):
        return self._deg[: self.size].copy()

    def has_edge(self, u, v):
        if not (0 <= u < self.size and 0 <= v < self.size):
            return False
        return bool(has_edge_k(self._nbrs, self._deg, u, v))

    def edge_count(self):
        return int(self._deg[: self.size].sum()) // 2

    def edges(self):
        """Yield each undirected edge once as (u, v, w) with u < v."""
        for u in range(self.size):
            for j in range(self._deg[u]):
                v = int(self._nbrs[u, j])
                if u < v:
                    yield u, v, float(self._wts[u, j])

    def total_weight(self):
        # every edge appears twice in the rows
        n = self.size
        mask = np.arange(self.d)[None, :] < self._deg[:n, None]
        return float(np.where(mask, self._wts[:n].astype(np.float64), 0.0).sum()) / 2.0

    def is_settled(self):
        return bool(self.size == 0 or np.all(self._deg[: self.size] == self.d))

    # --- snapshots and logs ---

    def snapshot(self):
        n = self.size
        return (self._nbrs[:n].copy(), self._wts[:n].copy(), self._deg[:n].copy())

    def same_as(self, snap):
        nbrs, wts, deg = snap
        n = self.size
        return (
            n == len(deg)
            and np.array_equal(self._deg[:n], deg)
            and np.array_equal(self._nbrs[:n], nbrs)
            and np.array_equal(self._wts[:n].view(np.uint32), wts.view(np.uint32))
        )

    def apply_log(self, log):
        """Replay a log forward."""
        self.require_mutable()
        for i, e in enumerate(log):
            if e.op == LOG_ADD:
                status = add_edge_k(self._nbrs, self._wts, self._deg, e.u, e.v, np.float32(e.weight))
            else:
                j = find_slot(self._nbrs, self._deg, e.u, e.v)
                if j >= 0 and self._wts[e.u, j] != np.float32(e.weight):
                    raise InconsistentLog(f"entry {i}: weight of ({e.u}, {e.v}) differs from log")
                status, _ = remove_edge_k(self._nbrs, self._wts, self._deg, e.u, e.v)
            if status != OK:
                raise InconsistentLog(f"entry {i} ({e}) cannot be applied")

    def revert_log(self, log):
        """Undo a log, newest entry first, restoring weights exactly."""
        self.require_mutable()
        entries = list(log)
        n = len(entries)
        if n == 0:
            return
        op = np.array([e.op for e in entries], dtype=np.int8)
        u = np.array([e.u for e in entries], dtype=np.int32)
        v = np.array([e.v for e in entries], dtype=np.int32)
        w = np.array([e.weight for e in entries], dtype=np.float32)
        bad = revert_log_k(self._nbrs, self._wts, self._deg, op, u, v, w, n)
        if bad >= 0:
            raise InconsistentLog(f"entry {bad} ({entries[bad]}) does not match the graph")

    def copy(self):
        g = DegGraph.__new__(DegGraph)
        g.d = self.d
        g.store = self.store
        g._nbrs = self._nbrs.copy()
        g._wts = self._wts.copy()
        g._deg = self._deg.copy()
        g.size = self.size
        g.has_weights = self.has_weights
        return g


def new_graph(d, store):
    """Empty graph of degree ``d`` bound to ``store``."""
    return DegGraph(d, store)
