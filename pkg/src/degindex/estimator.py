"""scikit-learn style wrapper around a DEG index."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .construction import BuildParams, build, insert
from .errors import DimensionMismatch
from .optimization import refine_for
from .search import explore_batch, median_seed, search_batch


class DEGIndex(BaseEstimator):
    """Approximate nearest neighbor index backed by an even-regular graph.

    Parameters
    ----------
    degree : int
        Edges per vertex; even and at least 4.
    k_ext, eps_ext : int, float
        Search width and range factor used while inserting vertices.
    k_opt, eps_opt, i_opt : int, float, int
        Search width, range factor and swap-chain length for edge optimization.
    scheme : {"A", "B", "C", "D"}
        Rule for choosing which edge of a found vertex to break on insertion.
    use_mrng : bool
        Prefer candidates that pass the relative neighborhood check.
    optimize_new_edges : bool
        Run edge optimization on fresh edges during construction.
    metric : {"sqeuclidean", "l2", "angular"}
    gain_metric : {"raw", "sqrt"}
    n_neighbors : int
        Default k for :meth:`kneighbors`.
    eps : float
        Search range factor used by :meth:`kneighbors`.
    random_state : int or None
        Seed for :meth:`refine`.

    Attributes
    ----------
    graph_ : DegGraph
    seed_vertex_ : int
        Entry vertex for queries, the vertex closest to the centroid.
    n_features_in_ : int
    """

    def __init__(self, degree=30, k_ext=60, eps_ext=0.2, k_opt=30, eps_opt=0.001, i_opt=5,
                 scheme="C", use_mrng=True, optimize_new_edges=True, metric="sqeuclidean",
                 gain_metric="raw", n_neighbors=10, eps=0.1, random_state=None):
        self.degree = degree
        self.k_ext = k_ext
        self.eps_ext = eps_ext
        self.k_opt = k_opt
        self.eps_opt = eps_opt
        self.i_opt = i_opt
        self.scheme = scheme
        self.use_mrng = use_mrng
        self.optimize_new_edges = optimize_new_edges
        self.metric = metric
        self.gain_metric = gain_metric
        self.n_neighbors = n_neighbors
        self.eps = eps
        self.random_state = random_state

    def _build_params(self):
        return BuildParams(
            d=self.degree, k_ext=self.k_ext, eps_ext=self.eps_ext, k_opt=self.k_opt,
            eps_opt=self.eps_opt, i_opt=self.i_opt, scheme=self.scheme,
            use_mrng=self.use_mrng, optimize_new_edges=self.optimize_new_edges,
            gain_metric=self.gain_metric,
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float32, order="C")
        self.graph_ = build(X, self._build_params(), metric=self.metric)
        self.n_features_in_ = X.shape[1]
        self.seed_vertex_ = median_seed(self.graph_)
        self._rng = np.random.default_rng(self.random_state)
        return self

    def partial_fit(self, X, y=None):
        """Insert more rows; the first call behaves like :meth:`fit`."""
        if not hasattr(self, "graph_"):
            return self.fit(X)
        X = self._check_X(X)
        insert(self.graph_, X, self._build_params())
        self.seed_vertex_ = median_seed(self.graph_)
        return self

    def _check_X(self, X):
        X = check_array(X, dtype=np.float32, order="C")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"X has {X.shape[1]} features, index was fitted with {self.n_features_in_}"
            )
        return X

    def kneighbors(self, X=None, n_neighbors=None, return_distance=True):
        """Approximate neighbors of ``X``; with ``X=None``, of each indexed point excluding itself.

        Distances are in the index metric (squared Euclidean by default).
        Rows are padded with -1 / inf if fewer than ``n_neighbors`` were found.
        """
        check_is_fitted(self, "graph_")
        k = self.n_neighbors if n_neighbors is None else int(n_neighbors)
        if k < 1:
            raise ValueError("n_neighbors must be >= 1")
        if X is None:
            ids, dists, _, _ = explore_batch(self.graph_, np.arange(self.graph_.size), k, self.eps)
        else:
            X = self._check_X(X)
            ids, dists, _, _ = search_batch(self.graph_, X, k, self.eps, seed=self.seed_vertex_)
        return (dists, ids) if return_distance else ids

    def refine(self, iterations=None, seconds=None):
        """Continue improving edges; returns a RefinementReport."""
        check_is_fitted(self, "graph_")
        return refine_for(
            self.graph_, iterations=iterations, seconds=seconds, rng=self._rng,
            i_opt=self.i_opt, k_opt=self.k_opt, eps_opt=self.eps_opt,
            gain_metric=self.gain_metric,
        )
