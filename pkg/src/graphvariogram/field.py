"""Spatial sampling and simulation of isotropic Gaussian random fields.

Fields are zero-mean and second-order stationary, parametrized by a
semivariogram model.  Covariances follow from ``C(h) = C(0) - gamma(h)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "Scheme",
    "ModelKind",
    "SpatialSample",
    "VariogramModel",
    "FieldEnsemble",
    "UnsupportedModelError",
    "NumericalError",
    "DEFAULT_JITTER",
    "sample_positions",
    "pairwise_distances",
    "covariance_from_model",
    "generate_ensemble",
    "realization_rng",
    "save_positions",
    "load_positions",
    "save_signals",
    "load_signals",
]

DEFAULT_JITTER = 1e-10

# Nonuniform layout: equal-weight truncated Gaussian mixture.
MIXTURE_MEANS = np.array([[0.25, 0.25], [0.7, 0.6], [0.4, 0.85]])
MIXTURE_STD = 0.12

_TEXT_FMT = "%.17g"


class UnsupportedModelError(ValueError):
    """The variogram model has no stationary covariance."""


class NumericalError(ArithmeticError):
    """Cholesky factorization failed at a given leading minor."""

    def __init__(self, minor):
        self.minor = int(minor)
        super().__init__(
            f"covariance is not positive definite: leading minor of order "
            f"{self.minor} failed"
        )


class Scheme(str, Enum):
    UNIFORM = "uniform"
    NONUNIFORM = "nonuniform"


class ModelKind(str, Enum):
    EXPONENTIAL = "exponential"
    NUGGET = "nugget"
    LINEAR = "linear"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpatialSample:
    """N distinct sensor positions in the unit square."""

    positions: np.ndarray
    scheme: Scheme = Scheme.UNIFORM
    seed: int | None = None

    def __post_init__(self):
        pos = _frozen(self.positions)
        if pos.ndim != 2:
            raise ValueError("positions must have shape (n, d)")
        if pos.shape[0] < 2:
            raise ValueError("a spatial sample needs at least 2 points")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def dim(self):
        return self.positions.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class VariogramModel:
    """Isotropic semivariogram ``gamma(h) = nugget * 1{h > 0} + sill * rho(h)``.

    ``rho`` is ``1 - exp(-h / range)`` for the exponential kind, ``1{h > 0}``
    for the nugget kind and ``h / range`` for the (unbounded) linear kind.
    """

    kind: ModelKind = ModelKind.EXPONENTIAL
    sill: float = 1.0
    range: float = 0.2
    nugget: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.sill < 0 or self.nugget < 0:
            raise ValueError("sill and nugget must be nonnegative")
        if self.kind is not ModelKind.NUGGET and not self.range > 0:
            raise ValueError("range must be positive")

    @classmethod
    def exponential(cls, sill=1.0, range=0.2, nugget=0.0):
        return cls(ModelKind.EXPONENTIAL, sill, range, nugget)

    @classmethod
    def pure_nugget(cls, sill=1.0):
        return cls(ModelKind.NUGGET, sill, 1.0, 0.0)

    @classmethod
    def linear(cls, slope=1.0, range=1.0, nugget=0.0):
        return cls(ModelKind.LINEAR, slope, range, nugget)

    @property
    def bounded(self):
        return self.kind is not ModelKind.LINEAR

    @property
    def total_variance(self):
        """C(0) = sill + nugget (bounded kinds only)."""
        if not self.bounded:
            raise UnsupportedModelError(f"{self.kind.value} model has no finite sill")
        return self.sill + self.nugget

    def semivariogram(self, h):
        h = np.asarray(h, dtype=float)
        positive = (h > 0).astype(float)
        if self.kind is ModelKind.EXPONENTIAL:
            rho = -np.expm1(-h / self.range)
        elif self.kind is ModelKind.NUGGET:
            rho = positive
        else:
            rho = h / self.range
        return self.nugget * positive + self.sill * rho

    __call__ = semivariogram

    def covariance(self, h):
        if not self.bounded:
            raise UnsupportedModelError(
                f"{self.kind.value} variogram is unbounded; no stationary covariance"
            )
        return self.total_variance - self.semivariogram(h)


@dataclass(frozen=True, eq=False)
class FieldEnsemble:
    """R realizations (rows) of a zero-mean field on a spatial sample."""

    signals: np.ndarray
    sample: SpatialSample
    model: VariogramModel | None = None
    generator_seed: int | None = None
    covariance_jitter: float = 0.0

    def __post_init__(self):
        sig = _frozen(self.signals)
        if sig.ndim == 1:
            sig = _frozen(sig[None, :])
        if sig.ndim != 2 or sig.shape[1] != self.sample.n:
            raise ValueError(
                f"signals must have shape (R, {self.sample.n}), got {sig.shape}"
            )
        object.__setattr__(self, "signals", sig)

    @property
    def realizations(self):
        return self.signals.shape[0]

    def __len__(self):
        return self.realizations

    def __iter__(self):
        return iter(self.signals)


def _nonuniform(rng, n):
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        m = 2 * (n - filled) + 8
        comp = rng.integers(len(MIXTURE_MEANS), size=m)
        pts = MIXTURE_MEANS[comp] + MIXTURE_STD * rng.standard_normal((m, 2))
        pts = pts[np.all((pts >= 0.0) & (pts <= 1.0), axis=1)]
        take = min(len(pts), n - filled)
        out[filled:filled + take] = pts[:take]
        filled += take
    return out


def _draw(rng, n, scheme):
    if scheme is Scheme.UNIFORM:
        return rng.uniform(0.0, 1.0, size=(n, 2))
    return _nonuniform(rng, n)


def sample_positions(n, scheme="uniform", seed=0):
    """Draw ``n`` distinct positions in the unit square.

    ``uniform`` draws each axis i.i.d. on [0, 1].  ``nonuniform`` draws from
    an equal-weight three-component Gaussian mixture (per-axis std 0.12)
    truncated to the unit square by rejection.  Exact duplicates are redrawn.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 positions, got {n}")
    scheme = Scheme(scheme)
    rng = np.random.default_rng(seed)
    pos = _draw(rng, n, scheme)
    while True:
        _, first = np.unique(pos, axis=0, return_index=True)
        if len(first) == n:
            break
        dup = np.setdiff1d(np.arange(n), first)
        pos[dup] = _draw(rng, len(dup), scheme)
    return SpatialSample(pos, scheme, seed)


def pairwise_distances(positions):
    """Euclidean distance matrix of an (n, d) coordinate array."""
    p = np.asarray(positions, dtype=float)
    diff = p[:, None, :] - p[None, :, :]
    return np.sqrt(np.sum(diff**2, axis=-1))


def _as_positions(sample):
    return sample.positions if isinstance(sample, SpatialSample) else np.asarray(sample)


def covariance_from_model(sample, model, jitter=DEFAULT_JITTER):
    """Covariance matrix ``C(|s_i - s_j|) + jitter * I`` of the sampled field."""
    if not model.bounded:
        raise UnsupportedModelError(
            f"{model.kind.value} variogram is unbounded; no stationary covariance"
        )
    d = pairwise_distances(_as_positions(sample))
    cov = model.covariance(d)
    cov[np.diag_indices_from(cov)] = model.total_variance + jitter
    return cov


def _cholesky(cov):
    factor, info = lapack.dpotrf(cov, lower=1, clean=1)
    if info > 0:
        raise NumericalError(info)
    if info < 0:
        raise ValueError(f"illegal argument {-info} to dpotrf")
    return factor


def realization_rng(seed, index):
    """Independent generator for realization ``index`` (counter-based substream)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def standard_normals(n, r, seed, start=0):
    z = np.empty((r, n))
    for k in range(r):
        z[k] = realization_rng(seed, start + k).standard_normal(n)
    return z


def generate_ensemble(sample, model, r, seed=0, jitter=DEFAULT_JITTER):
    """Draw ``r`` realizations ``x = L z`` with ``L L^T = Sigma``.

    Realization ``k`` uses its own substream derived from ``(seed, k)``, so
    increasing ``r`` leaves earlier realizations unchanged.
    """
    if r < 1:
        raise ValueError("need at least one realization")
    n = sample.n
    if model.bounded and model.total_variance == 0:
        # degenerate zero-variance field; jitter would only inject noise
        return FieldEnsemble(np.zeros((r, n)), sample, model, seed, 0.0)
    factor = _cholesky(covariance_from_model(sample, model, jitter))
    z = standard_normals(n, r, seed)
    return FieldEnsemble(z @ factor.T, sample, model, seed, jitter)


def save_positions(path, sample):
    np.savetxt(path, sample.positions, fmt=_TEXT_FMT)


def load_positions(path, scheme="uniform", seed=None):
    return SpatialSample(np.loadtxt(path, ndmin=2), scheme, seed)


def save_signals(path, ensemble):
    np.savetxt(path, ensemble.signals, fmt=_TEXT_FMT)


def load_signals(path, sample, model=None):
    return FieldEnsemble(np.loadtxt(path, ndmin=2), sample, model)
