import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from graphvariogram.field import VariogramModel, covariance_from_model, generate_ensemble, sample_positions
from graphvariogram.graph import build_graph, laplacian
from graphvariogram.spectral import (
    align_curve,
    band_energy_ratio,
    decompose,
    empirical_psd,
    gft,
    to_db,
)


@pytest.fixture(scope="module")
def field_200():
    s = sample_positions(200, seed=21)
    g = build_graph(s, "full", 0.05)
    return s, g, decompose(laplacian(g))


class TestDecompose:
    def test_two_nodes(self):
        dec = decompose(laplacian(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert_allclose(dec.eigenvalues, [0.0, 2.0], atol=1e-15)
        r = 1 / math.sqrt(2)
        assert_allclose(dec.eigenvectors[:, 0], [r, r], rtol=1e-14)
        assert_allclose(dec.eigenvectors[:, 1], [r, -r], rtol=1e-14)

    def test_path_graph_spectrum(self):
        n = 4
        a = np.zeros((n, n))
        for i in range(n - 1):
            a[i, i + 1] = a[i + 1, i] = 1.0
        dec = decompose(laplacian(a))
        expected = [2 - 2 * math.cos(math.pi * k / n) for k in range(n)]
        assert_allclose(dec.eigenvalues, expected, atol=1e-12)

    def test_full_graph_reconstruction(self):
        g = build_graph(sample_positions(500, seed=1), "full", 0.05)
        lap = laplacian(g).laplacian
        dec = decompose(laplacian(g))
        u, lam = dec.eigenvectors, dec.eigenvalues
        assert np.max(np.abs(u @ np.diag(lam) @ u.T - lap)) <= 1e-8

    def test_basis_invariants(self, field_200):
        _, g, dec = field_200
        u, lam = dec.eigenvectors, dec.eigenvalues
        lap = laplacian(g).laplacian
        assert np.max(np.abs(u.T @ u - np.eye(200))) <= 1e-9
        resid = np.abs(lap @ u - u * lam).max(axis=0)
        assert np.all(resid <= 1e-8 * max(lam[-1], 1.0))
        assert abs(lam[0]) <= 1e-9
        f = dec.normalized_frequencies
        assert f[0] == 0.0 and f[-1] == 1.0 and np.all(np.diff(f) >= 0)

    def test_sign_convention(self, field_200):
        _, _, dec = field_200
        u = dec.eigenvectors
        lead = np.argmax(np.abs(u) > 1e-12, axis=0)
        assert np.all(u[lead, np.arange(200)] > 0)

    def test_rejects_non_symmetric(self):
        with pytest.raises(ValueError):
            decompose(np.array([[1.0, -1.0], [0.0, 0.0]]))


class TestPSD:
    def test_constant_signal_is_dc(self, field_200):
        _, _, dec = field_200
        x = np.outer([1.0, -2.0, 0.5], np.ones(200))
        psd = empirical_psd(x, dec)
        assert psd.mean[0] > 0
        # zero up to eigenvector roundoff
        assert np.max(np.abs(psd.mean[1:])) <= 1e-15 * psd.mean[0]

    def test_white_noise_is_flat(self, field_200):
        _, _, dec = field_200
        x = np.random.default_rng(2).standard_normal((5000, 200))
        psd = empirical_psd(x, dec)
        assert np.max(np.abs(psd.mean - 1.0)) <= 0.1

    def test_exponential_field_has_low_high_frequency_energy(self, field_200):
        s, _, dec = field_200
        e = generate_ensemble(s, VariogramModel.exponential(1.0, 0.2), 500, seed=5)
        psd = empirical_psd(e, dec)
        f = psd.frequencies
        assert psd.mean[f > 0.5].mean() < psd.mean[f < 0.1].mean()
        assert band_energy_ratio(psd) < 1.0

    def test_parseval(self, field_200):
        s, _, dec = field_200
        e = generate_ensemble(s, VariogramModel.exponential(), 50, seed=6)
        xh = gft(e.signals, dec)
        assert_allclose((xh**2).sum(axis=1), (e.signals**2).sum(axis=1), rtol=1e-9)

    def test_population_identity(self):
        s = sample_positions(40, seed=7)
        g = build_graph(s, "full", 0.05)
        dec = decompose(laplacian(g))
        model = VariogramModel.exponential()
        e = generate_ensemble(s, model, 20000, seed=8)
        u = dec.eigenvectors
        target = np.diag(u.T @ covariance_from_model(s, model) @ u)
        psd = empirical_psd(e, dec)
        assert np.max(np.abs(psd.mean - target)) <= 0.05 * target.max()

    def test_sampling_schemes_disagree(self):
        model = VariogramModel.exponential()
        grid = np.linspace(0.0, 1.0, 101)

        def curve(scheme, seed):
            s = sample_positions(200, scheme, seed=seed)
            dec = decompose(laplacian(build_graph(s, "full", 0.05)))
            psd = empirical_psd(generate_ensemble(s, model, 1000, seed=seed + 100), dec)
            return align_curve(psd.frequencies, psd.mean, grid)

        def rel(a, b):
            return np.linalg.norm(a - b) / np.linalg.norm(a)

        u1, u2 = curve("uniform", 1), curve("uniform", 2)
        nu1, nu2 = curve("nonuniform", 3), curve("nonuniform", 4)
        within = max(rel(u1, u2), rel(nu1, nu2))
        across = min(rel(u1, nu1), rel(u2, nu2), rel(u1, nu2))
        assert across > within

    def test_dimension_mismatch(self, field_200):
        _, _, dec = field_200
        with pytest.raises(ValueError):
            empirical_psd(np.ones((3, 10)), dec)

    def test_dat_linear_and_db(self, field_200, tmp_path):
        _, _, dec = field_200
        x = np.random.default_rng(0).standard_normal((20, 200))
        psd = empirical_psd(x, dec)
        psd.to_dat(tmp_path / "lin.dat")
        psd.to_dat(tmp_path / "db.dat", db=True)
        lin = np.loadtxt(tmp_path / "lin.dat")
        db = np.loadtxt(tmp_path / "db.dat")
        assert lin.shape == (200, 4)
        assert_allclose(lin[:, 2] - lin[:, 1], psd.std)
        assert_allclose(db[:, 1], 10 * np.log10(psd.mean))
        assert (tmp_path / "db.dat").read_text().startswith("# freq")


def test_align_curve_nearest():
    f = np.array([0.0, 0.2, 0.5, 1.0])
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert_allclose(align_curve(f, v, np.array([0.0, 0.09, 0.11, 0.4, 0.9, 1.0])), [1, 1, 2, 3, 4, 4])


def test_to_db_of_nonpositive_is_nan():
    out = to_db(np.array([10.0, 0.0, -1.0]))
    assert out[0] == pytest.approx(10.0)
    assert np.isnan(out[1:]).all()
