"""Graph variograms as normalized Laplacian quadratic forms.

Pairs of vertices are grouped by distance into disjoint bins.  For a bin and
a center vertex ``k`` the binned adjacency is windowed as ``G_k A G_k`` and
the local estimate is

    2 gamma(bin, k) = 2 * x^T L x / (1^T D 1)

with ``L = D - G_k A G_k``.  The global estimate averages local ones over the
center vertices where the bin is defined.

Sums over pair contributions are taken in ascending order of the
contributions themselves.  This makes each estimate a function of the
multiset of pair terms only, so relabeling vertices gives bit-identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .field import FieldEnsemble, SpatialSample

__all__ = [
    "BinPartition",
    "WindowKind",
    "VertexWindow",
    "BinnedGraphFamily",
    "VariogramEstimate",
    "VariogramStatistics",
    "DiagnosticScores",
    "DEFAULT_BINS",
    "make_bins",
    "binned_family",
    "local_graph_variogram",
    "global_graph_variogram",
    "global_variogram_values",
    "classical_empirical_variogram",
    "ensemble_statistics",
    "value_statistics",
    "aggregate_statistics",
    "stationarity_diagnostic",
    "write_curve_dat",
]

DEFAULT_BINS = 20

# Upper bound on (realizations x pairs) held in memory at once.
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class BinPartition:
    """Disjoint distance intervals ``(edges[j], edges[j+1]]`` covering ``(0, d_max]``."""

    edges: np.ndarray

    def __post_init__(self):
        e = np.array(self.edges, dtype=float)
        if e.ndim != 1 or len(e) < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if e[0] != 0.0 or np.any(np.diff(e) <= 0):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def equal_width(cls, d_max, n_bins):
        if n_bins < 1:
            raise ValueError(f"need at least one bin, got {n_bins}")
        if not d_max > 0:
            raise ValueError("d_max must be positive")
        return cls(np.linspace(0.0, d_max, n_bins + 1))

    @property
    def n_bins(self):
        return len(self.edges) - 1

    @property
    def d_max(self):
        return float(self.edges[-1])

    @property
    def width(self):
        return np.diff(self.edges)

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def __len__(self):
        return self.n_bins

    def __eq__(self, other):
        if not isinstance(other, BinPartition):
            return NotImplemented
        return np.array_equal(self.edges, other.edges)

    __hash__ = None

    def assign(self, d):
        """Bin index of each distance; -1 outside ``(0, d_max]``."""
        d = np.asarray(d, dtype=float)
        idx = np.searchsorted(self.edges, d, side="left") - 1
        out = (d <= 0) | (d > self.edges[-1])
        return np.where(out, -1, idx)

    def refine(self, factor):
        """Split every bin into ``factor`` equal parts, keeping existing breakpoints."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        parts = [self.edges[:1]]
        for lo, hi in zip(self.edges[:-1], self.edges[1:]):
            inner = np.linspace(lo, hi, factor + 1)[1:]
            inner[-1] = hi
            parts.append(inner)
        return BinPartition(np.concatenate(parts))


def make_bins(graph, n_bins=DEFAULT_BINS, d_max=None):
    """Equal-width partition of ``(0, d_max]``; ``d_max`` defaults to the graph's."""
    if n_bins < 1:
        raise ValueError(f"need at least one bin, got {n_bins}")
    if d_max is None:
        d_max = graph.d_max
    return BinPartition.equal_width(d_max, n_bins)


class WindowKind(str, Enum):
    ONES = "ones"
    BALL = "ball"
    GAUSS = "gauss"


@dataclass(frozen=True)
class VertexWindow:
    """Vertex-domain window ``g_k`` centered on vertex ``k``.

    ``ones`` gives the global estimator, ``ball`` the indicator of the
    closed disc of radius ``scale`` around ``s_k``, and ``gauss`` a
    Gaussian decay ``exp(-|s_i - s_k|^2 / (2 scale^2))``.
    """

    kind: WindowKind = WindowKind.ONES
    scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.kind is not WindowKind.ONES and not (self.scale and self.scale > 0):
            raise ValueError(f"{self.kind.value} window needs a positive scale")

    @classmethod
    def ones(cls):
        return cls(WindowKind.ONES)

    @classmethod
    def ball(cls, radius):
        return cls(WindowKind.BALL, float(radius))

    @classmethod
    def gauss(cls, rho):
        return cls(WindowKind.GAUSS, float(rho))

    @classmethod
    def parse(cls, text):
        """Parse ``ones``, ``ball:<r>`` or ``gauss:<rho>``."""
        if isinstance(text, VertexWindow):
            return text
        name, _, arg = str(text).partition(":")
        if name == "ones" and not arg:
            return cls.ones()
        if name in ("ball", "gauss") and arg:
            return cls(WindowKind(name), float(arg))
        raise ValueError(f"bad window spec {text!r}")

    def __str__(self):
        if self.is_ones:
            return "ones"
        return f"{self.kind.value}:{self.scale!r}"

    @property
    def is_ones(self):
        return self.kind is WindowKind.ONES

    def _from_distance(self, d):
        if self.kind is WindowKind.ONES:
            return np.ones_like(d)
        if self.kind is WindowKind.BALL:
            return (d <= self.scale).astype(float)
        return np.exp(-(d**2) / (2.0 * self.scale**2))

    def values(self, distances, center):
        """``g_k`` for center vertex ``k`` given the graph distance matrix."""
        return self._from_distance(np.asarray(distances)[center])

    def matrix(self, distances):
        """All windows at once; row ``k`` is ``g_k``."""
        return self._from_distance(np.asarray(distances, dtype=float))


def _graph_bin_layout(graph, bins):
    """Graph edges grouped by bin: sorted edge arrays and bin pointers."""
    idx = bins.assign(graph.edge_distances)
    keep = idx >= 0
    edges = graph.edges[keep]
    idx = idx[keep]
    order = np.argsort(idx, kind="stable")
    ptr = np.searchsorted(idx[order], np.arange(bins.n_bins + 1), side="left")
    return edges[order], ptr


@dataclass(frozen=True, eq=False)
class BinnedGraphFamily:
    """Per-bin binned (and possibly windowed) adjacency structure of a graph.

    Edges of bin ``h`` are ``edges[ptr[h]:ptr[h+1]]`` with ``i < j``; their
    windowed weights ``g_k[i] g_k[j]`` are in ``weights``.
    """

    n: int
    bins: BinPartition
    edges: np.ndarray
    ptr: np.ndarray
    weights: np.ndarray
    window: VertexWindow
    center: int | None

    def _slice(self, h):
        if not 0 <= h < self.bins.n_bins:
            raise IndexError(f"bin {h} out of range")
        return slice(self.ptr[h], self.ptr[h + 1])

    @property
    def support_counts(self):
        """Ordered-pair count of each unwindowed binned adjacency."""
        return 2 * np.diff(self.ptr)

    @property
    def pair_counts(self):
        """Unordered pairs with a nonzero windowed weight, per bin."""
        cs = np.concatenate([[0], np.cumsum(self.weights > 0)])
        return cs[self.ptr[1:]] - cs[self.ptr[:-1]]

    @property
    def degree_sums(self):
        """``1^T D 1`` of each windowed binned Laplacian."""
        return np.array(
            [2.0 * _ordered_sum(self.weights[self._slice(h)]) for h in range(self.bins.n_bins)]
        )

    def support_mask(self, h):
        m = np.zeros((self.n, self.n), dtype=np.int8)
        e = self.edges[self._slice(h)]
        m[e[:, 0], e[:, 1]] = 1
        m[e[:, 1], e[:, 0]] = 1
        return m

    def adjacency(self, h):
        s = self._slice(h)
        a = np.zeros((self.n, self.n))
        e, w = self.edges[s], self.weights[s]
        a[e[:, 0], e[:, 1]] = w
        a[e[:, 1], e[:, 0]] = w
        return a

    def degree(self, h):
        return self.adjacency(h).sum(axis=1)

    def laplacian(self, h):
        a = self.adjacency(h)
        return np.diag(a.sum(axis=1)) - a


def binned_family(graph, bins, window=None, center=None):
    """Bin the edges of ``graph`` by distance and apply a vertex window.

    A ``center`` vertex is required unless the window is ``ones``.
    """
    window = VertexWindow.ones() if window is None else VertexWindow.parse(window)
    if center is not None and not 0 <= center < graph.n:
        raise IndexError(f"center {center} out of range for {graph.n} vertices")
    if center is None and not window.is_ones:
        raise ValueError(f"{window.kind.value} window needs a center vertex")
    edges, ptr = _graph_bin_layout(graph, bins)
    if window.is_ones:
        weights = np.ones(len(edges))
    else:
        g = window.values(graph.distances, center)
        weights = g[edges[:, 0]] * g[edges[:, 1]]
    return BinnedGraphFamily(graph.n, bins, edges, ptr, weights, window, center)


def _ordered_sum(values, axis=-1):
    return np.sum(np.sort(values, axis=axis), axis=axis)


def _quadratic_sums(x, edges, ptr, weights=None):
    """Per-bin ``x^T L x`` for a stack of signals, shape (R, H).

    Each bin sums ``w_ij (x_i - x_j)^2`` over its edges in ascending order.
    """
    r = x.shape[0]
    n_bins = len(ptr) - 1
    out = np.zeros((r, n_bins))
    if len(edges) == 0:
        return out
    step = max(1, _CHUNK_ELEMENTS // len(edges))
    for start in range(0, r, step):
        xs = x[start:start + step]
        terms = (xs[:, edges[:, 0]] - xs[:, edges[:, 1]]) ** 2
        if weights is not None:
            terms *= weights
        for h in range(n_bins):
            lo, hi = ptr[h], ptr[h + 1]
            if hi > lo:
                out[start:start + step, h] = _ordered_sum(terms[:, lo:hi])
    return out


@dataclass(frozen=True, eq=False)
class VariogramEstimate:
    """Binned variogram estimate ``2 gamma`` for one signal.

    Undefined bins hold ``nan``.  ``scope`` is ``"global"`` or the center
    vertex index of a local estimate.
    """

    bins: BinPartition
    values: np.ndarray
    pair_counts: np.ndarray
    scope: str | int = "global"

    @property
    def defined(self):
        return ~np.isnan(self.values)

    @property
    def semivariogram(self):
        return 0.5 * self.values

    @property
    def centers(self):
        return self.bins.centers

    def to_dat(self, path):
        g = self.semivariogram
        write_curve_dat(path, self.centers, g, np.where(self.defined, 0.0, np.nan))


def _ratio(num, den):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, 2.0 * num / np.where(den > 0, den, 1.0), np.nan)


def _as_signals(signal, n):
    if isinstance(signal, FieldEnsemble):
        signal = signal.signals
    x = np.asarray(signal, dtype=float)
    if x.shape[-1] != n or x.ndim not in (1, 2):
        raise ValueError(f"signal length must be {n}, got shape {x.shape}")
    return x


def local_graph_variogram(signal, family):
    """Local graph variogram of ``signal`` for every bin of ``family``.

    A 2-D ``signal`` (one realization per row) gives a list of estimates.
    """
    x = _as_signals(signal, family.n)
    stack = np.atleast_2d(x)
    num = _quadratic_sums(
        stack, family.edges, family.ptr, None if family.window.is_ones else family.weights
    )
    vals = _ratio(num, family.degree_sums)
    scope = "global" if family.center is None else int(family.center)
    counts = family.pair_counts
    ests = [VariogramEstimate(family.bins, v, counts, scope) for v in vals]
    return ests[0] if x.ndim == 1 else ests


def _windowed_local_values(x, graph, bins, window):
    """Yield per bin the (N, R) local values and the defined-center mask."""
    edges, ptr = _graph_bin_layout(graph, bins)
    gmat = window.matrix(graph.distances)
    for h in range(bins.n_bins):
        e = edges[ptr[h]:ptr[h + 1]]
        wk = gmat[:, e[:, 0]] * gmat[:, e[:, 1]]
        den = 2.0 * wk.sum(axis=1)
        ok = den > 0
        local = np.full((graph.n, x.shape[0]), np.nan)
        if ok.any():
            sq = (x[:, e[:, 0]] - x[:, e[:, 1]]) ** 2
            local[ok] = 2.0 * (wk[ok] @ sq.T) / den[ok, None]
        yield h, local, ok, len(e)


def global_variogram_values(signals, graph, bins, window=None):
    """Global graph variogram ``2 gamma`` as an (R, H) array plus pair counts."""
    window = VertexWindow.ones() if window is None else VertexWindow.parse(window)
    x = np.atleast_2d(_as_signals(signals, graph.n))
    if window.is_ones:
        fam = binned_family(graph, bins)
        num = _quadratic_sums(x, fam.edges, fam.ptr)
        return _ratio(num, fam.degree_sums), fam.pair_counts
    vals = np.full((x.shape[0], bins.n_bins), np.nan)
    counts = np.zeros(bins.n_bins, dtype=np.int64)
    for h, local, ok, n_pairs in _windowed_local_values(x, graph, bins, window):
        counts[h] = n_pairs
        if ok.any():
            vals[:, h] = local[ok].mean(axis=0)
    return vals, counts


def global_graph_variogram(signal, graph, bins, window=None):
    """Global graph variogram: the average of local ones over defined centers.

    With the ``ones`` window every local estimate is the same, and the
    global estimate is that shared value.
    """
    x = _as_signals(signal, graph.n)
    vals, counts = global_variogram_values(x, graph, bins, window)
    ests = [VariogramEstimate(bins, v, counts, "global") for v in vals]
    return ests[0] if x.ndim == 1 else ests


def classical_empirical_variogram(signal, sample, bins):
    """Binned empirical variogram ``2 gamma`` by a direct loop over point pairs."""
    pos = sample.positions if isinstance(sample, SpatialSample) else np.asarray(sample)
    x = np.asarray(signal, dtype=float)
    if x.shape != (len(pos),):
        raise ValueError(f"signal must have shape ({len(pos)},), got {x.shape}")
    terms = [[] for _ in range(bins.n_bins)]
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            d = np.sqrt(np.sum((pos[i] - pos[j]) ** 2))
            b = int(bins.assign(d))
            if b >= 0:
                terms[b].append((x[i] - x[j]) ** 2)
    counts = np.array([len(t) for t in terms], dtype=np.int64)
    vals = np.array([math.fsum(t) / len(t) if t else np.nan for t in terms])
    return VariogramEstimate(bins, vals, counts, "global")


@dataclass(frozen=True, eq=False)
class VariogramStatistics:
    """Per-bin mean and (n-1)-normalized std of the semivariogram."""

    bins: BinPartition
    mean: np.ndarray
    std: np.ndarray
    count: np.ndarray
    pair_counts: np.ndarray | None = None

    @property
    def centers(self):
        return self.bins.centers

    def to_dat(self, path):
        write_curve_dat(path, self.centers, self.mean, self.std)


def _column_stats(g):
    count = np.sum(~np.isnan(g), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        total = np.nansum(g, axis=0)
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
        dev = np.where(np.isnan(g), 0.0, g - mean) ** 2
        std = np.where(count > 1, np.sqrt(dev.sum(axis=0) / np.maximum(count - 1, 1)), np.nan)
    return mean, std, count


def ensemble_statistics(estimates):
    """Mean and std of the semivariogram across estimates, skipping undefined bins."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("no estimates")
    bins = estimates[0].bins
    if any(e.bins != bins for e in estimates[1:]):
        raise ValueError("estimates use different bin partitions")
    return value_statistics(
        np.array([e.values for e in estimates]), bins, estimates[0].pair_counts
    )


def value_statistics(values, bins, pair_counts=None):
    """Statistics of an (R, H) array of ``2 gamma`` values (``nan`` = undefined)."""
    mean, std, count = _column_stats(0.5 * np.atleast_2d(values))
    return VariogramStatistics(bins, mean, std, count, pair_counts)


def aggregate_statistics(stats):
    """Second-level statistics of per-graph mean curves across graph realizations."""
    stats = list(stats)
    if not stats:
        raise ValueError("no statistics")
    bins = stats[0].bins
    if any(s.bins != bins for s in stats[1:]):
        raise ValueError("statistics use different bin partitions")
    mean, std, count = _column_stats(np.array([s.mean for s in stats]))
    pairs = [s.pair_counts for s in stats if s.pair_counts is not None]
    pair_counts = np.min(pairs, axis=0) if pairs else None
    return VariogramStatistics(bins, mean, std, count, pair_counts)


@dataclass(frozen=True, eq=False)
class DiagnosticScores:
    """Standardized deviation of local from global semivariogram means.

    ``scores[k, h]`` is ``(mean local - mean global) / (std local / sqrt(R))``.
    """

    bins: BinPartition
    scores: np.ndarray
    local_mean: np.ndarray
    global_mean: np.ndarray
    realizations: int

    def to_dat(self, path):
        n, n_bins = self.scores.shape
        k = np.repeat(np.arange(n), n_bins)
        h = np.tile(self.bins.centers, n)
        with open(path, "w") as fh:
            fh.write("# k h score\n")
            for kk, hh, s in zip(k, h, self.scores.ravel()):
                fh.write(f"{kk} {hh:.17g} {s:.17g}\n")


def stationarity_diagnostic(ensemble, graph, bins, window):
    """Per-vertex, per-bin deviation of local variograms from the global one.

    A descriptive screen, not a hypothesis test: scores far from zero flag
    vertices whose expected local semivariogram departs from the global one.
    """
    window = VertexWindow.parse(window)
    x = np.atleast_2d(_as_signals(ensemble, graph.n))
    r = x.shape[0]
    n_bins = bins.n_bins
    scores = np.full((graph.n, n_bins), np.nan)
    local_mean = np.full((graph.n, n_bins), np.nan)
    global_mean = np.full(n_bins, np.nan)

    if window.is_ones:
        vals, _ = global_variogram_values(x, graph, bins, window)
        gm = 0.5 * vals.mean(axis=0)
        ok = ~np.isnan(gm)
        global_mean[:] = gm
        local_mean[:, ok] = gm[ok]
        scores[:, ok] = 0.0
        return DiagnosticScores(bins, scores, local_mean, global_mean, r)

    for h, local, ok, _ in _windowed_local_values(x, graph, bins, window):
        if not ok.any():
            continue
        semi = 0.5 * local[ok]
        glob = semi.mean(axis=0)
        global_mean[h] = glob.mean()
        lm = semi.mean(axis=1)
        local_mean[ok, h] = lm
        se = semi.std(axis=1, ddof=1) / np.sqrt(r) if r > 1 else np.zeros(len(lm))
        diff = lm - global_mean[h]
        # zero spread: score is 0 on agreement, signed infinity otherwise
        with np.errstate(invalid="ignore", divide="ignore"):
            scores[ok, h] = np.where(se > 0, diff / se, np.sign(diff) * np.inf)
            scores[ok, h] = np.where((se == 0) & (diff == 0), 0.0, scores[ok, h])
    return DiagnosticScores(bins, scores, local_mean, global_mean, r)


def write_curve_dat(path, x, mean, std, header=("h", "mean", "mean+std", "mean-std")):
    """Write ``x, mean, mean+std, mean-std`` rows; missing values print as ``nan``."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    data = np.column_stack([x, mean, mean + std, mean - std])
    np.savetxt(path, data, fmt="%.17g", header=" ".join(header))
