"""Graph variograms for random signals on spatial sensor graphs."""

from .field import (
    FieldEnsemble,
    NumericalError,
    SpatialSample,
    UnsupportedModelError,
    VariogramModel,
    covariance_from_model,
    generate_ensemble,
    sample_positions,
)
from .graph import LaplacianView, SensorGraph, build_graph, laplacian, quadratic_form
from .spectral import SpectralDecomposition, decompose, empirical_psd
from .variogram import (
    BinPartition,
    BinnedGraphFamily,
    VariogramEstimate,
    VariogramStatistics,
    VertexWindow,
    aggregate_statistics,
    binned_family,
    classical_empirical_variogram,
    ensemble_statistics,
    global_graph_variogram,
    local_graph_variogram,
    make_bins,
    stationarity_diagnostic,
)

__version__ = "0.1.0"

__all__ = [
    "FieldEnsemble",
    "NumericalError",
    "SpatialSample",
    "UnsupportedModelError",
    "VariogramModel",
    "covariance_from_model",
    "generate_ensemble",
    "sample_positions",
    "LaplacianView",
    "SensorGraph",
    "build_graph",
    "laplacian",
    "quadratic_form",
    "SpectralDecomposition",
    "decompose",
    "empirical_psd",
    "BinPartition",
    "BinnedGraphFamily",
    "VariogramEstimate",
    "VariogramStatistics",
    "VertexWindow",
    "aggregate_statistics",
    "binned_family",
    "classical_empirical_variogram",
    "ensemble_statistics",
    "global_graph_variogram",
    "local_graph_variogram",
    "make_bins",
    "stationarity_diagnostic",
]
