import itertools
import json
import math

import numpy as np
import pytest

from gbsdock.exceptions import EncodingError, NumericalError, ValidationError
from gbsdock.gbs import (
    Encoding,
    GaussianState,
    apply_loss,
    build_encoding,
    encoding_to_dict,
    hafnian,
    mean_clicks,
    mean_photon_number,
    spectral_c_bound,
    state_from_encoding,
    symplectic_eigenvalues,
    threshold_probability,
    tune_c_for_clicks,
    vacuum_probability,
    vacuum_state,
)
from gbsdock.graphs import complete_graph, from_edges, laplacian

from conftest import random_graph
from oracles import hafnian_by_matching_enumeration, perfect_matching_count_complete


def squeezed_vacuum_covariance(rs):
    """Direct product-state covariance: x variance e^{2r}/2, p variance e^{-2r}/2."""
    rs = np.asarray(rs, dtype=np.float64)
    return np.diag(np.concatenate([np.exp(2 * rs) / 2, np.exp(-2 * rs) / 2]))


class TestHafnian:
    def test_empty_matrix(self):
        assert hafnian(np.zeros((0, 0))) == 1.0

    def test_single_edge(self):
        assert hafnian(np.array([[0.0, 1.0], [1.0, 0.0]])) == 1.0

    def test_complete_graphs(self):
        k4 = complete_graph(4).adjacency
        assert hafnian(k4) == 3.0
        k6 = complete_graph(6).adjacency
        assert hafnian(k6) == 15.0

    def test_complete_graph_formula_exact(self):
        for n_pairs in range(1, 9):
            a = complete_graph(2 * n_pairs).adjacency
            assert hafnian(a) == perfect_matching_count_complete(n_pairs)

    def test_complete_minus_edge(self):
        a = np.array(complete_graph(6).adjacency)
        a[0, 1] = a[1, 0] = 0.0
        # (2n-2)/(2n-1) of the complete count with n = 3
        assert hafnian(a) == pytest.approx(15.0 * 4.0 / 5.0)

    def test_diagonal_is_ignored(self):
        a = np.array([[5.0, 2.0], [2.0, -7.0]])
        assert hafnian(a) == 2.0

    def test_matches_matching_enumeration(self, rng):
        for _ in range(40):
            n = 2 * int(rng.integers(1, 5))
            a = rng.standard_normal((n, n))
            a = a + a.T
            expected = hafnian_by_matching_enumeration(a)
            assert hafnian(a) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValidationError):
            hafnian(np.zeros((3, 3)))

    def test_dimension_guard(self):
        with pytest.raises(ValidationError):
            hafnian(np.zeros((26, 26)))

    def test_asymmetric_rejected(self):
        a = np.zeros((2, 2))
        a[0, 1] = 1.0
        with pytest.raises(ValidationError):
            hafnian(a)


class TestSpectralBound:
    def test_complete_graph_unit_omega(self):
        g = complete_graph(4)
        assert spectral_c_bound(g, np.ones(4)) == pytest.approx(1.0 / 6.0)

    def test_zero_degree_vertices_excluded(self):
        g = from_edges(3, [[0, 1]])
        # vertex 2 is isolated; only degree-1 vertices constrain the bound
        assert spectral_c_bound(g, np.array([1.0, 1.0, 100.0])) == pytest.approx(0.5)

    def test_edgeless_graph_is_unconstrained(self):
        g = from_edges(3, [])
        assert spectral_c_bound(g, np.ones(3)) == math.inf

    def test_rejects_nonpositive_omega(self):
        g = complete_graph(3)
        with pytest.raises(ValidationError):
            spectral_c_bound(g, np.array([1.0, 0.0, 1.0]))

    def test_bound_controls_spectrum(self, rng):
        # At c equal to the bound, the spectrum of B stays within [0, c].
        for _ in range(100):
            n = int(rng.integers(2, 12))
            g = random_graph(rng, n, density=max(0.2, rng.random()))
            if g.n_edges == 0:
                continue
            alpha = float(rng.random() * 2)
            omega_raw = 1.0 + alpha * g.vertex_weights
            c = spectral_c_bound(g, omega_raw)
            omega = c * omega_raw
            b = omega[:, None] * laplacian(g) * omega[None, :]
            evals = np.linalg.eigvalsh(b)
            assert evals[-1] <= c + 1e-9
            assert evals[0] >= -1e-9


class TestBuildEncoding:
    def test_alpha_zero_gives_plain_laplacian_scaling(self):
        g = from_edges(4, [[0, 1], [1, 2], [2, 3]], [0.7, 0.7, 0.7, 0.7])
        e = build_encoding(g, alpha=0.0, target_c=0.3)
        np.testing.assert_allclose(e.omega, 0.3)
        np.testing.assert_allclose(e.b_matrix, 0.09 * laplacian(g), atol=1e-12)

    def test_auto_c_keeps_spectrum_valid(self, rng):
        for _ in range(30):
            g = random_graph(rng, int(rng.integers(2, 14)), density=0.6)
            e = build_encoding(g, alpha=float(rng.random() * 3))
            evals = np.linalg.eigvalsh(e.b_matrix)
            assert evals[-1] < 1.0
            assert evals[0] >= -1e-9
            assert 0.0 < e.c < 1.0

    def test_squeezing_matches_eigenvalues(self, rng):
        g = random_graph(rng, 8, density=0.5)
        e = build_encoding(g, alpha=1.0)
        np.testing.assert_allclose(np.tanh(e.squeezing), np.linalg.eigvalsh(e.b_matrix), atol=1e-9)

    def test_excessive_target_c_rejected(self):
        g = complete_graph(6)
        with pytest.raises(EncodingError):
            build_encoding(g, alpha=0.0, target_c=0.999)

    def test_target_c_out_of_range(self):
        g = complete_graph(3)
        with pytest.raises(ValidationError):
            build_encoding(g, target_c=1.5)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ValidationError):
            build_encoding(complete_graph(3), alpha=-0.5)

    def test_weight_factorization_on_subsets(self, rng):
        # |Haf(B_S)| = det(Omega_S) * |Haf(A_S)| for any even subset S.
        for _ in range(60):
            n = int(rng.integers(4, 11))
            g = random_graph(rng, n, density=0.6)
            e = build_encoding(g, alpha=float(rng.random() * 2))
            k = 2 * int(rng.integers(1, n // 2 + 1))
            s = np.sort(rng.choice(n, size=k, replace=False))
            b_s = e.b_matrix[np.ix_(s, s)]
            a_s = g.adjacency[np.ix_(s, s)]
            det_omega = float(np.prod(e.omega[s]))
            assert abs(hafnian(b_s)) == pytest.approx(
                det_omega * abs(hafnian(a_s)), rel=1e-9, abs=1e-12
            )


class TestGaussianState:
    def test_vacuum_is_valid(self):
        s = vacuum_state(3)
        assert s.n_modes == 3
        assert vacuum_probability(s) == pytest.approx(1.0)

    def test_uncertainty_violation_rejected(self):
        with pytest.raises(ValidationError):
            GaussianState(np.eye(2) / 4.0)

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValidationError):
            GaussianState(np.eye(3))

    def test_squeezed_vacuum_probability(self):
        r = 0.9
        s = GaussianState(squeezed_vacuum_covariance([r]))
        assert vacuum_probability(s) == pytest.approx(1.0 / math.cosh(r), rel=1e-12)

    def test_mean_photon_number(self):
        rs = [0.3, 0.8]
        s = GaussianState(squeezed_vacuum_covariance(rs))
        expected = sum(math.sinh(r) ** 2 for r in rs)
        assert mean_photon_number(s) == pytest.approx(expected, rel=1e-12)


class TestStateFromEncoding:
    def test_round_trip_to_device_matrix(self, rng):
        # Recover B (+) B from the covariance through the defining relation.
        g = random_graph(rng, 6, density=0.6)
        e = build_encoding(g, alpha=1.0)
        s = state_from_encoding(e)
        m = e.n_modes
        eye = np.eye(m)
        rot = np.block([[eye, eye], [-1j * eye, 1j * eye]]) / math.sqrt(2.0)
        sigma_ops = rot.conj().T @ s.covariance @ rot
        x = np.block([[np.zeros((m, m)), eye], [eye, np.zeros((m, m))]])
        recovered = x @ (np.eye(2 * m) - np.linalg.inv(sigma_ops + np.eye(2 * m) / 2.0))
        expected = np.block([[e.b_matrix, np.zeros((m, m))], [np.zeros((m, m)), e.b_matrix]])
        np.testing.assert_allclose(recovered.real, expected, atol=1e-9)
        assert np.max(np.abs(recovered.imag)) < 1e-9

    def test_purity(self, rng):
        for _ in range(10):
            g = random_graph(rng, int(rng.integers(2, 10)), density=0.7)
            s = state_from_encoding(build_encoding(g, alpha=0.5))
            assert abs(np.linalg.det(2.0 * s.covariance) - 1.0) < 1e-6
            nu = symplectic_eigenvalues(s)
            np.testing.assert_allclose(nu, 0.5, atol=1e-7)

    def test_block_structure_for_real_encoding(self, rng):
        g = random_graph(rng, 5, density=0.8)
        e = build_encoding(g, alpha=2.0)
        s = state_from_encoding(e)
        m = e.n_modes
        b = e.b_matrix
        np.testing.assert_allclose(
            s.covariance[:m, :m], np.linalg.inv(np.eye(m) - b) - np.eye(m) / 2, atol=1e-9
        )
        np.testing.assert_allclose(
            s.covariance[m:, m:], np.linalg.inv(np.eye(m) + b) - np.eye(m) / 2, atol=1e-9
        )
        np.testing.assert_allclose(s.covariance[:m, m:], 0.0, atol=1e-9)

    def test_vacuum_probability_product_over_eigenmodes(self, rng):
        g = random_graph(rng, 7, density=0.5)
        e = build_encoding(g, alpha=1.0)
        s = state_from_encoding(e)
        lam = np.linalg.eigvalsh(e.b_matrix)
        assert vacuum_probability(s) == pytest.approx(float(np.prod(np.sqrt(1 - lam**2))), rel=1e-9)


class TestLoss:
    def test_halves_mean_photons(self):
        s = GaussianState(squeezed_vacuum_covariance([0.7, 1.1]))
        lossy = apply_loss(s, 0.5)
        assert mean_photon_number(lossy) == pytest.approx(mean_photon_number(s) / 2, rel=1e-12)

    def test_eta_one_is_identity(self):
        s = GaussianState(squeezed_vacuum_covariance([0.4]))
        np.testing.assert_array_equal(apply_loss(s, 1.0).covariance, s.covariance)

    def test_eta_out_of_range(self):
        s = vacuum_state(1)
        for eta in (0.0, -0.2, 1.2):
            with pytest.raises(ValidationError):
                apply_loss(s, eta)

    def test_lossy_state_remains_valid_mixed(self):
        s = apply_loss(GaussianState(squeezed_vacuum_covariance([1.2])), 0.6)
        nu = symplectic_eigenvalues(s)
        assert nu.min() >= 0.5 - 1e-9
        assert nu.max() > 0.5 + 1e-6  # strictly mixed


class TestThresholdProbability:
    def test_single_mode_click_complement(self):
        r = 0.8
        s = GaussianState(squeezed_vacuum_covariance([r]))
        p_click = threshold_probability(s, [1])
        assert p_click == pytest.approx(1.0 - 1.0 / math.cosh(r), rel=1e-10)
        assert threshold_probability(s, [0]) == pytest.approx(1.0 / math.cosh(r), rel=1e-10)

    def test_vacuum_never_clicks(self):
        s = vacuum_state(3)
        assert threshold_probability(s, [0, 0, 0]) == pytest.approx(1.0)
        assert threshold_probability(s, [1, 0, 0]) == 0.0

    def test_normalization_pure_and_lossy(self, rng):
        for trial in range(8):
            m = int(rng.integers(2, 7))
            g = random_graph(rng, m, density=0.7)
            if g.n_edges == 0:
                continue
            e = build_encoding(g, alpha=float(rng.random()))
            s = state_from_encoding(e)
            if trial % 2:
                s = apply_loss(s, 0.75)
            total = sum(
                threshold_probability(s, pattern)
                for pattern in itertools.product([0, 1], repeat=m)
            )
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_pattern_validation(self):
        s = vacuum_state(2)
        with pytest.raises(ValidationError):
            threshold_probability(s, [0, 1, 0])
        with pytest.raises(ValidationError):
            threshold_probability(s, [0, 2])

    def test_mean_clicks_matches_enumeration(self, rng):
        g = random_graph(rng, 5, density=0.8)
        s = state_from_encoding(build_encoding(g, alpha=1.0))
        expected = sum(
            threshold_probability(s, p) * sum(p) for p in itertools.product([0, 1], repeat=5)
        )
        assert mean_clicks(s) == pytest.approx(expected, abs=1e-9)

    def test_single_mode_click_statistics(self):
        # With tanh(r) = lam, mean photons lam^2/(1-lam^2), click rate 1 - sqrt(1-lam^2).
        lam = 0.75
        r = math.atanh(lam)
        s = GaussianState(squeezed_vacuum_covariance([r]))
        assert mean_photon_number(s) == pytest.approx(lam**2 / (1 - lam**2), rel=1e-10)
        assert mean_clicks(s) == pytest.approx(1.0 - math.sqrt(1 - lam**2), rel=1e-10)


class TestTuneC:
    def test_reaches_target_on_dense_graph(self, rng):
        g = random_graph(rng, 12, density=0.6)
        e = tune_c_for_clicks(g, alpha=1.0, target_clicks=4.0)
        s = state_from_encoding(e)
        assert abs(mean_clicks(s) - 4.0) <= 1e-3

    def test_lossy_needs_larger_c(self, rng):
        g = random_graph(rng, 10, density=0.6)
        e_clean = tune_c_for_clicks(g, alpha=1.0, target_clicks=3.0, eta=1.0)
        e_lossy = tune_c_for_clicks(g, alpha=1.0, target_clicks=3.0, eta=0.8)
        assert e_lossy.c > e_clean.c
        s = apply_loss(state_from_encoding(e_lossy), 0.8)
        assert abs(mean_clicks(s) - 3.0) <= 1e-3

    def test_unreachable_target_reports_maximum(self):
        g = from_edges(3, [[0, 1]])
        with pytest.raises(EncodingError) as err:
            tune_c_for_clicks(g, alpha=0.0, target_clicks=2.5)
        assert "maximum achievable" in str(err.value)

    def test_edgeless_graph(self):
        g = from_edges(3, [])
        with pytest.raises(EncodingError):
            tune_c_for_clicks(g, alpha=1.0, target_clicks=1.0)

    def test_target_range_validated(self):
        g = complete_graph(4)
        with pytest.raises(ValidationError):
            tune_c_for_clicks(g, alpha=1.0, target_clicks=4.0)
        with pytest.raises(ValidationError):
            tune_c_for_clicks(g, alpha=1.0, target_clicks=0.0)


class TestEncodingSerialization:
    def test_dict_round_trips_through_json(self, rng):
        g = random_graph(rng, 6, density=0.7)
        e = build_encoding(g, alpha=1.5)
        d = json.loads(json.dumps(encoding_to_dict(e)))
        assert d["n_modes"] == 6
        assert d["alpha"] == 1.5
        assert d["c"] == e.c
        np.testing.assert_allclose(d["omega"], e.omega)
        np.testing.assert_allclose(d["eigenvalues"], np.tanh(e.squeezing))
        rebuilt = build_encoding(g, alpha=d["alpha"], target_c=d["c"])
        np.testing.assert_allclose(rebuilt.b_matrix, e.b_matrix, atol=1e-12)
