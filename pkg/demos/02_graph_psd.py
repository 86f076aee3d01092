"""Graph power spectral density of a smooth field.

The Laplacian eigenbasis plays the role of a Fourier basis.  A field with
short-range correlation puts most of its energy at low graph frequency,
and the PSD shape depends on where the sensors sit.
"""

import numpy as np

import graphvariogram as gv
from graphvariogram.spectral import band_energy_ratio, gft

model = gv.VariogramModel.exponential(1.0, 0.2)

for scheme in ("uniform", "nonuniform"):
    sample = gv.sample_positions(200, scheme, seed=3)
    dec = gv.decompose(gv.laplacian(gv.build_graph(sample, "full", sigma=0.05)))
    ensemble = gv.generate_ensemble(sample, model, 1000, seed=4)
    psd = gv.empirical_psd(ensemble, dec)
    f = psd.frequencies
    print(f"{scheme}: lambda_max={dec.eigenvalues[-1]:.3f}")
    print(f"  mean PSD, f < 0.1: {psd.mean[f < 0.1].mean():.4f}")
    print(f"  mean PSD, f > 0.5: {psd.mean[f > 0.5].mean():.4f}")
    print(f"  high/low energy ratio: {band_energy_ratio(psd):.4f}")

# the transform is orthonormal, so energy is preserved
xh = gft(ensemble.signals[:5], dec)
print("Parseval:", np.allclose((xh**2).sum(axis=1), (ensemble.signals[:5] ** 2).sum(axis=1)))

# a constant signal lives entirely at the zero frequency
const = gv.empirical_psd(np.ones((1, 200)), dec)
print("DC share of constant signal:", const.mean[0] / const.mean.sum())
