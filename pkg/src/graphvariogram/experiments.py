"""Seeded end-to-end experiments writing plot-ready ``.dat`` files.

Each runner takes an :class:`ExperimentConfig`, writes its artifacts and a
flat ``summary.txt`` (``key=value`` lines) into ``config.out`` and returns
the summary as a dict.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .field import (
    FieldEnsemble,
    ModelKind,
    VariogramModel,
    generate_ensemble,
    sample_positions,
    save_positions,
    save_signals,
)
from .graph import build_graph, laplacian, save_edge_list
from .spectral import band_energy_ratio, decompose, empirical_psd
from .variogram import (
    VertexWindow,
    aggregate_statistics,
    global_variogram_values,
    make_bins,
    stationarity_diagnostic,
    value_statistics,
)

__all__ = [
    "ExperimentConfig",
    "parse_model",
    "format_model",
    "run_variogram_experiment",
    "run_psd_experiment",
    "run_stationarity_diagnostic",
    "run_simulation",
    "read_summary",
]

FIELD_KINDS = ("model", "white", "constant")


def parse_model(text):
    """``exp:<sill>:<range>[:<nugget>]``, ``nugget:<sill>`` or ``linear:<slope>:<range>``."""
    if isinstance(text, VariogramModel):
        return text
    name, *args = str(text).split(":")
    vals = [float(a) for a in args]
    try:
        if name in ("exp", "exponential") and len(vals) in (2, 3):
            return VariogramModel.exponential(*vals)
        if name == "nugget" and len(vals) == 1:
            return VariogramModel.pure_nugget(vals[0])
        if name == "linear" and len(vals) in (1, 2, 3):
            return VariogramModel.linear(*vals)
    except ValueError as exc:
        raise ValueError(f"bad model spec {text!r}: {exc}") from None
    raise ValueError(f"bad model spec {text!r}")


def format_model(model):
    if model.kind is ModelKind.EXPONENTIAL:
        s = f"exp:{model.sill!r}:{model.range!r}"
        return s + (f":{model.nugget!r}" if model.nugget else "")
    if model.kind is ModelKind.NUGGET:
        return f"nugget:{model.sill!r}"
    return f"linear:{model.sill!r}:{model.range!r}:{model.nugget!r}"


def _to_bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 500
    scheme: str = "uniform"
    connectivity: str = "full"
    k: int = 100
    sigma: float = 0.05
    model: VariogramModel = dataclasses.field(default_factory=VariogramModel.exponential)
    field: str = "model"
    realizations: int = 1000
    graphs: int = 1
    bins: int = 20
    dmax: float = 0.0
    window: VertexWindow = dataclasses.field(default_factory=VertexWindow.ones)
    seed: int = 0
    out: str = "out"
    db: bool = False
    threads: int = 0
    min_pairs: int = 100

    _converters = {
        "n": int, "scheme": str, "connectivity": str, "k": int, "sigma": float,
        "model": parse_model, "field": str, "realizations": int, "graphs": int,
        "bins": int, "dmax": float, "window": VertexWindow.parse, "seed": int, "out": str,
        "db": _to_bool, "threads": int, "min_pairs": int,
    }

    def __post_init__(self):
        for name in ("n", "realizations", "graphs", "bins", "k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.scheme not in ("uniform", "nonuniform"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.connectivity not in ("full", "knn"):
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        if self.connectivity == "knn" and self.k >= self.n:
            raise ValueError(f"k={self.k} must be < n={self.n}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.field not in FIELD_KINDS:
            raise ValueError(f"field must be one of {FIELD_KINDS}")
        if min(self.seed, self.threads, self.min_pairs, self.dmax) < 0:
            raise ValueError("seed, threads, min_pairs and dmax must be nonnegative")

    @classmethod
    def from_mapping(cls, mapping, base=None):
        """Build a config from string values, on top of ``base`` (or defaults)."""
        base = base or cls()
        kwargs = {}
        for key, value in mapping.items():
            key = key.strip().replace("-", "_")
            if key not in cls._converters:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = cls._converters[key](value.strip() if isinstance(value, str) else value)
        return dataclasses.replace(base, **kwargs)

    @classmethod
    def from_text(cls, text, base=None):
        mapping = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {line!r}")
            mapping[key] = value
        return cls.from_mapping(mapping, base)

    @classmethod
    def load(cls, path, base=None):
        return cls.from_text(Path(path).read_text(), base)

    def to_items(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, VariogramModel):
                v = format_model(v)
            elif isinstance(v, float):
                v = repr(v)
            out[f.name] = str(v).lower() if isinstance(v, bool) else str(v)
        return out

    def to_text(self):
        return "".join(f"{k}={v}\n" for k, v in self.to_items().items())

    def save(self, path):
        Path(path).write_text(self.to_text())

    def effective_model(self):
        if self.field == "white":
            return VariogramModel.pure_nugget(self.model.sill)
        return self.model


def _derived_seed(seed, *keys):
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _limits(config):
    return threadpool_limits(limits=config.threads or None)


def _prepare_out(config):
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


def _sample(config, g):
    return sample_positions(config.n, config.scheme, _derived_seed(config.seed, g, 0))


def _graph(config, sample):
    return build_graph(sample, config.connectivity, config.sigma, config.k)


def _ensemble(config, sample, g):
    seed = _derived_seed(config.seed, g, 1)
    if config.field == "constant":
        rng = np.random.default_rng(seed)
        c = np.sqrt(config.model.sill) * rng.standard_normal(config.realizations)
        return FieldEnsemble(np.outer(c, np.ones(sample.n)), sample, None, seed)
    return generate_ensemble(sample, config.effective_model(), config.realizations, seed)


def _write_summary(out, items):
    lines = []
    for key, value in items.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(_fmt(v) for v in value)
        else:
            value = _fmt(value)
        lines.append(f"{key}={value}\n")
    (out / "summary.txt").write_text("".join(lines))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def read_summary(path):
    """Parse a ``summary.txt`` into a dict of strings."""
    path = Path(path)
    if path.is_dir():
        path = path / "summary.txt"
    items = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition("=")
        items[key] = value
    return items


def _truth(config, centers):
    if config.field == "constant":
        return np.zeros_like(centers)
    model = config.effective_model()
    return model.semivariogram(centers)


def run_variogram_experiment(config):
    """Global graph variogram statistics over signal (and graph) realizations.

    Writes ``variogram.dat``, ``truth.dat`` and ``summary.txt``.  Bins span
    ``(0, dmax]``; with ``dmax = 0`` that is the largest pair distance over
    all graph realizations.  With more than one graph the curve reports the
    mean and std of per-graph mean curves.
    """
    out = _prepare_out(config)
    with _limits(config):
        samples = [_sample(config, g) for g in range(config.graphs)]
        graphs = [_graph(config, s) for s in samples]
        d_max = config.dmax or max(gr.d_max for gr in graphs)
        bins = make_bins(graphs[0], config.bins, d_max=d_max)
        per_graph = []
        for g, (sample, graph) in enumerate(zip(samples, graphs)):
            ens = _ensemble(config, sample, g)
            vals, counts = global_variogram_values(ens.signals, graph, bins, config.window)
            per_graph.append(value_statistics(vals, bins, counts))
    stats = per_graph[0] if config.graphs == 1 else aggregate_statistics(per_graph)
    centers = bins.centers
    truth = _truth(config, centers)
    stats.to_dat(out / "variogram.dat")
    np.savetxt(out / "truth.dat", np.column_stack([centers, truth]), fmt="%.17g", header="h gamma")

    counts = stats.pair_counts
    usable = (counts >= config.min_pairs) & ~np.isnan(stats.mean)
    err = np.abs(stats.mean - truth)
    summary = {"experiment": "variogram", **config.to_items()}
    summary.update(
        d_max=d_max,
        bin_centers=centers,
        pair_counts=counts,
        mean=stats.mean,
        std=stats.std,
        truth=truth,
        bins_used=int(usable.sum()),
        max_abs_error=float(err[usable].max()) if usable.any() else float("nan"),
    )
    _write_summary(out, summary)
    return summary


def run_psd_experiment(config):
    """Empirical graph PSD of the field on one sampled graph; writes ``psd.dat``."""
    out = _prepare_out(config)
    with _limits(config):
        sample = _sample(config, 0)
        graph = _graph(config, sample)
        ens = _ensemble(config, sample, 0)
        dec = decompose(laplacian(graph))
        psd = empirical_psd(ens, dec)
    psd.to_dat(out / "psd.dat", db=config.db)
    summary = {"experiment": "psd", **config.to_items()}
    summary.update(
        lambda_max=float(dec.eigenvalues[-1]),
        energy_ratio=band_energy_ratio(psd),
        dc_fraction=float(psd.mean[0] / psd.mean.sum()) if psd.mean.sum() > 0 else float("nan"),
    )
    _write_summary(out, summary)
    return summary


def run_stationarity_diagnostic(config):
    """Per-vertex local-vs-global deviation scores; writes ``scores.dat``."""
    out = _prepare_out(config)
    with _limits(config):
        sample = _sample(config, 0)
        graph = _graph(config, sample)
        ens = _ensemble(config, sample, 0)
        bins = make_bins(graph, config.bins, d_max=config.dmax or None)
        diag = stationarity_diagnostic(ens, graph, bins, config.window)
    diag.to_dat(out / "scores.dat")
    finite = np.isfinite(diag.scores)
    within = np.abs(diag.scores[finite]) <= 2.0
    summary = {"experiment": "diagnose", **config.to_items()}
    summary.update(
        defined_scores=int(finite.sum()),
        fraction_within_2=float(within.mean()) if finite.any() else float("nan"),
        max_abs_score=float(np.abs(diag.scores[finite]).max()) if finite.any() else float("nan"),
    )
    _write_summary(out, summary)
    return summary


def run_simulation(config):
    """Dump positions, edge list and raw signals of the first graph realization."""
    out = _prepare_out(config)
    with _limits(config):
        sample = _sample(config, 0)
        graph = _graph(config, sample)
        ens = _ensemble(config, sample, 0)
    save_positions(out / "positions.dat", sample)
    save_edge_list(out / "edges.dat", graph)
    save_signals(out / "signals.dat", ens)
    summary = {"experiment": "simulate", **config.to_items()}
    summary.update(n_edges=graph.n_edges, d_max=graph.d_max)
    _write_summary(out, summary)
    return summary
