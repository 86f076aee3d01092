"""Graph Fourier transform and empirical graph power spectral density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .field import FieldEnsemble
from .graph import LaplacianView
from .variogram import write_curve_dat

__all__ = [
    "SpectralDecomposition",
    "PSDEstimate",
    "decompose",
    "gft",
    "empirical_psd",
    "band_energy_ratio",
    "align_curve",
    "to_db",
]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending Laplacian eigenvalues with an orthonormal eigenbasis (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return len(self.eigenvalues)

    @property
    def normalized_frequencies(self):
        lam_max = self.eigenvalues[-1]
        if lam_max <= 0:
            return np.zeros_like(self.eigenvalues)
        return np.clip(self.eigenvalues / lam_max, 0.0, 1.0)


def _fix_signs(u, tol=1e-12):
    # first entry above tol in each column made positive
    lead = np.argmax(np.abs(u) > tol, axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def decompose(lap):
    """Full eigendecomposition of a graph Laplacian."""
    if isinstance(lap, LaplacianView):
        lap = lap.laplacian
    a = lap.toarray() if sp.issparse(lap) else np.asarray(lap, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Laplacian must be square, got {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("Laplacian must be symmetric")
    lam, u = sla.eigh(a)
    return SpectralDecomposition(lam, _fix_signs(u))


def gft(signal, decomposition):
    """Graph Fourier coefficients ``U^T x`` (row-wise for a stack of signals)."""
    x = np.asarray(signal, dtype=float)
    if x.shape[-1] != decomposition.n:
        raise ValueError(f"signal length must be {decomposition.n}, got {x.shape[-1]}")
    return x @ decomposition.eigenvectors


def to_db(values):
    with np.errstate(divide="ignore", invalid="ignore"):
        return 10.0 * np.log10(np.where(np.asarray(values) > 0, values, np.nan))


@dataclass(frozen=True, eq=False)
class PSDEstimate:
    """Per-frequency mean and std of squared GFT coefficients (linear scale)."""

    frequencies: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    realizations: int

    def to_dat(self, path, db=False):
        """Write ``frequency, mean, mean+std, mean-std``; ``db`` converts each column."""
        cols = ("freq", "mean", "mean+std", "mean-std")
        if not db:
            write_curve_dat(path, self.frequencies, self.mean, self.std, cols)
            return
        data = np.column_stack([
            self.frequencies,
            to_db(self.mean),
            to_db(self.mean + self.std),
            to_db(self.mean - self.std),
        ])
        np.savetxt(path, data, fmt="%.17g", header=" ".join(c + "_db" if c != "freq" else c for c in cols))


def empirical_psd(ensemble, decomposition):
    """Empirical graph PSD of an ensemble of graph signals."""
    x = ensemble.signals if isinstance(ensemble, FieldEnsemble) else np.atleast_2d(ensemble)
    power = gft(x, decomposition) ** 2
    r = power.shape[0]
    mean = power.mean(axis=0)
    std = power.std(axis=0, ddof=1) if r > 1 else np.zeros_like(mean)
    return PSDEstimate(decomposition.normalized_frequencies, mean, std, r)


def band_energy_ratio(psd, high=0.5, low=0.1):
    """Mean PSD above normalized frequency ``high`` over mean PSD below ``low``."""
    f = psd.frequencies
    top = psd.mean[f > high]
    bottom = psd.mean[f < low]
    if len(top) == 0 or len(bottom) == 0:
        return np.nan
    return float(top.mean() / bottom.mean())


def align_curve(frequencies, values, grid):
    """Nearest-neighbour resampling of a PSD curve onto a common frequency grid."""
    f = np.asarray(frequencies)
    idx = np.clip(np.searchsorted(f, grid), 1, len(f) - 1)
    left_closer = (grid - f[idx - 1]) <= (f[idx] - grid)
    return np.asarray(values)[np.where(left_closer, idx - 1, idx)]
