"""Sensor graphs built from spatial samples.

Edges carry Gaussian-kernel weights ``exp(-d^2 / (2 sigma^2))``.  A graph is
either fully connected or restricted to a union-symmetrized K-nearest
neighbour support.  The Laplacian is the combinatorial one, ``L = D - A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .field import SpatialSample, pairwise_distances

__all__ = [
    "Connectivity",
    "SensorGraph",
    "LaplacianView",
    "DENSE_LIMIT",
    "build_graph",
    "knn_support",
    "laplacian",
    "quadratic_form",
    "save_edge_list",
    "load_edge_list",
]

# Beyond this size sparse (KNN) graphs are stored in CSR form.
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Connectivity:
    """``Connectivity()`` is the fully connected graph, ``Connectivity(k)`` KNN."""

    k: int | None = None

    @property
    def is_full(self):
        return self.k is None

    @classmethod
    def parse(cls, value, k=None):
        if isinstance(value, Connectivity):
            return value
        if value in (None, "full"):
            return cls()
        if value == "knn":
            if k is None:
                raise ValueError("knn connectivity needs k")
            return cls(int(k))
        raise ValueError(f"unknown connectivity {value!r}")

    def __str__(self):
        return "full" if self.is_full else f"knn({self.k})"


def _readonly(a):
    if sp.issparse(a):
        for arr in (a.data, a.indices, a.indptr):
            arr.setflags(write=False)
    else:
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SensorGraph:
    """Undirected weighted graph over the points of a spatial sample.

    ``edges`` lists the support as ``(i, j)`` rows with ``i < j`` in
    lexicographic order.  It is kept separately from the weights so that
    kernel underflow never removes an edge.
    """

    sample: SpatialSample
    adjacency: np.ndarray | sp.csr_array
    distances: np.ndarray
    edges: np.ndarray
    sigma: float
    connectivity: Connectivity

    @property
    def n(self):
        return self.sample.n

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def d_max(self):
        return float(self.distances.max())

    @property
    def edge_distances(self):
        return self.distances[self.edges[:, 0], self.edges[:, 1]]

    @property
    def edge_weights(self):
        i, j = self.edges[:, 0], self.edges[:, 1]
        if sp.issparse(self.adjacency):
            return np.asarray(self.adjacency[i, j]).ravel()
        return self.adjacency[i, j]

    def dense_adjacency(self):
        if sp.issparse(self.adjacency):
            return self.adjacency.toarray()
        return np.array(self.adjacency)


@dataclass(frozen=True, eq=False)
class LaplacianView:
    laplacian: np.ndarray | sp.csr_array
    degree: np.ndarray

    @property
    def n(self):
        return self.degree.shape[0]

    def dense(self):
        if sp.issparse(self.laplacian):
            return self.laplacian.toarray()
        return np.array(self.laplacian)


def knn_support(distances, k):
    """Boolean union-symmetrized K-nearest-neighbour relation.

    Neighbours are ranked by distance, ties going to the lower vertex index.
    """
    n = distances.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}, got {k}")
    d = np.array(distances, dtype=float)
    np.fill_diagonal(d, np.inf)
    # stable sort keeps index order among equal distances
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), k), order.ravel()] = True
    return mask | mask.T


def build_graph(sample, connectivity="full", sigma=0.05, k=None):
    """Gaussian-kernel sensor graph on ``sample``.

    ``connectivity`` is ``"full"``, ``"knn"`` (with ``k``) or a
    :class:`Connectivity`.
    """
    if not sigma > 0:
        raise ValueError(f"kernel sigma must be positive, got {sigma}")
    conn = Connectivity.parse(connectivity, k)
    n = sample.n
    dist = pairwise_distances(sample.positions)
    if conn.is_full:
        iu, ju = np.triu_indices(n, 1)
    else:
        iu, ju = np.nonzero(np.triu(knn_support(dist, conn.k), 1))
    edges = np.column_stack([iu, ju]).astype(np.intp)
    w = np.exp(-dist[iu, ju] ** 2 / (2.0 * sigma**2))

    if not conn.is_full and n > DENSE_LIMIT:
        adj = sp.coo_array(
            (np.concatenate([w, w]), (np.concatenate([iu, ju]), np.concatenate([ju, iu]))),
            shape=(n, n),
        ).tocsr()
    else:
        adj = np.zeros((n, n))
        adj[iu, ju] = w
        adj[ju, iu] = w
    return SensorGraph(
        sample, _readonly(adj), _readonly(dist), _readonly(edges), float(sigma), conn
    )


def laplacian(graph_or_adjacency):
    """Combinatorial Laplacian ``D - A`` of a graph or symmetric adjacency."""
    a = graph_or_adjacency
    if isinstance(a, SensorGraph):
        a = a.adjacency
    if sp.issparse(a):
        deg = np.asarray(a.sum(axis=1)).ravel()
        lap = (sp.diags_array(deg) - a).tocsr()
    else:
        a = np.asarray(a, dtype=float)
        deg = a.sum(axis=1)
        lap = np.diag(deg) - a
    return LaplacianView(_readonly(lap), _readonly(deg))


def quadratic_form(lap, x):
    """``x^T L x`` for a Laplacian-like symmetric matrix (or a LaplacianView).

    ``x`` may be a vector or an (R, N) stack of signals; a stack returns R
    values.
    """
    if isinstance(lap, LaplacianView):
        lap = lap.laplacian
    x = np.asarray(x, dtype=float)
    n = lap.shape[0]
    if lap.shape != (n, n) or x.shape[-1] != n:
        raise ValueError(
            f"dimension mismatch: matrix {lap.shape}, signal {x.shape}"
        )
    lx = (lap @ x.T).T
    return np.sum(lx * x, axis=-1)


def save_edge_list(path, graph):
    """Write rows ``i j d_ij w_ij`` (0-based, one row per undirected edge)."""
    e = graph.edges
    with open(path, "w") as fh:
        fh.write("# i j d_ij w_ij\n")
        for (i, j), d, w in zip(e, graph.edge_distances, graph.edge_weights):
            fh.write(f"{i} {j} {d:.17g} {w:.17g}\n")


def load_edge_list(path):
    """Read an edge list back as ``(edges, distances, weights)`` arrays."""
    data = np.loadtxt(path, ndmin=2, comments="#")
    if data.size == 0:
        return np.empty((0, 2), dtype=np.intp), np.empty(0), np.empty(0)
    return data[:, :2].astype(np.intp), data[:, 2], data[:, 3]
