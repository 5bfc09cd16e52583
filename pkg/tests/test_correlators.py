import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohsim import correlators as c
from cohsim import optics
from cohsim.ensemble import make_grid
from cohsim.errors import ParameterError
from cohsim.optics import ModeLabel, OpticsParams

Q = math.pi / 4
SIGMA = 5.0
angle = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
finite = st.floats(-30, 30, allow_nan=False)


@pytest.fixture(scope="module")
def grid():
    return make_grid()


class TestIntensities:
    def test_port1_dark_at_zero(self):
        assert c.intensity_port1(Q, 0.0, 0.0, 0.0) == 0.0

    @given(finite, finite, angle)
    def test_which_path_flat(self, df, tau, phi):
        assert c.intensity_port1(0.0, df, tau, phi) == 0.25
        assert c.intensity_port2(0.0, df, tau, phi) == 0.25

    def test_port1_bright_at_pi(self):
        assert c.intensity_port1(Q, 3.0, 0.0, math.pi) == pytest.approx(0.5, abs=1e-15)

    def test_port2_bright_at_zero(self):
        assert c.intensity_port2(Q, 0.0, 0.0, 0.0) == 0.5

    @given(finite, finite, angle)
    def test_complementary(self, df, tau, phi):
        assert c.intensity_port1(Q, df, tau, phi) + c.intensity_port2(Q, df, tau, phi) == pytest.approx(0.5, abs=1e-15)

    @given(angle, angle, finite, finite, angle)
    def test_bounds(self, xi, th, df, tau, phi):
        for v in (c.intensity_port1(xi, df, tau, phi), c.intensity_port2(th, df, tau, phi)):
            assert -1e-16 <= v <= 0.5 + 1e-16

    @settings(max_examples=200)
    @given(angle, angle, finite, finite, angle)
    def test_equals_projected_field_intensity(self, xi, th, df, tau, phi):
        # independent route: |sum of projected coefficients|^2
        a, b = optics.mzi_output_fields(OpticsParams(xi=xi, theta=th, phi=phi, tau=tau, delta_f=df))
        i1 = abs(sum(optics.polarizer_project(xi, a).values())) ** 2
        i2 = abs(sum(optics.polarizer_project(th, b).values())) ** 2
        assert c.intensity_port1(xi, df, tau, phi) == pytest.approx(i1, abs=1e-12)
        assert c.intensity_port2(th, df, tau, phi) == pytest.approx(i2, abs=1e-12)

    def test_scale(self):
        assert c.intensity_port2(Q, 0, 0, 0, I0=4.0) == 2.0


class TestEraser:
    def scan(self, xi):
        phi = np.deg2rad(np.linspace(0, 360, 73))
        return c.eraser_means(xi, xi, phi)

    def test_full_visibility(self):
        i1, i2 = self.scan(Q)
        assert c.visibility(i1) == pytest.approx(1.0, abs=1e-12)
        assert c.visibility(i2) == pytest.approx(1.0, abs=1e-12)

    def test_zero_visibility(self):
        i1, _ = self.scan(0.0)
        assert c.visibility(i1) == 0.0

    def test_pi_over_8(self):
        i1, _ = self.scan(math.pi / 8)
        assert c.visibility(i1) == pytest.approx(0.7071067811865476, abs=1e-12)

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_ensemble_independent(self, tau_unused, phi):
        # at zero delay every detuning gives the same value, so any ensemble average agrees
        grid = make_grid(n_points=41)
        per_j = c.intensity_port1(0.4, grid.points, 0.0, phi)
        assert per_j @ grid.weights == pytest.approx(c.eraser_means(0.4, 0.4, phi)[0], abs=1e-15)


class TestClassicalCoincidence:
    def test_zero_delay_exact(self, grid):
        assert c.classical_coincidence(grid, Q, Q, 0.0, 0.0) == 0.0

    @pytest.mark.parametrize(
        "tau_sigma,oracle",
        # continuous Gaussian average by scipy.integrate.quad
        [(0.1, 0.03844182680668209), (0.29432, 0.24996172673062644), (0.5, 0.43233235838169387),
         (1.0, 0.49983226868604885), (6.0, 0.5000000000902759)],
    )
    def test_against_continuous_quadrature(self, grid, tau_sigma, oracle):
        assert c.classical_coincidence(grid, Q, Q, 0.0, tau_sigma / SIGMA) == pytest.approx(oracle, abs=1e-3)

    @pytest.mark.parametrize(
        "tau_sigma,oracle", [(0.0, 0.9194580989718368), (0.2, 0.9157428598799726), (0.6, 0.8603505458568347)]
    )
    def test_generic_angles(self, grid, tau_sigma, oracle):
        assert c.classical_coincidence(grid, 0.3, 1.1, 0.7, tau_sigma / SIGMA) == pytest.approx(oracle, abs=1e-3)

    def test_vectorized_matches_scalar(self, grid):
        taus = np.linspace(0, 1, 7)
        vec = c.classical_coincidence(grid, 0.3, 0.5, 0.2, taus)
        np.testing.assert_array_equal(vec, [c.classical_coincidence(grid, 0.3, 0.5, 0.2, t) for t in taus])

    def test_raw_normalization(self, grid):
        raw = c.classical_coincidence(grid, Q, Q, 0.0, 0.3, normalization="raw")
        assert raw * 16 == pytest.approx(c.classical_coincidence(grid, Q, Q, 0.0, 0.3), rel=1e-14)

    def test_bad_inputs(self, grid):
        with pytest.raises(ParameterError):
            c.classical_coincidence("grid", Q, Q, 0, 0)
        with pytest.raises(ParameterError):
            c.classical_coincidence(grid, Q, Q, 0, 0, normalization="other")

    def test_symmetric_in_tau(self, grid):
        taus = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(
            c.classical_coincidence(grid, Q, Q, 0, taus), c.classical_coincidence(grid, Q, Q, 0, -taus)
        )


class TestHeterodyne:
    def test_diagonal_zero(self):
        v, _ = c.heterodyne_pair(Q, Q, 1.0, 0.3, 0.2)
        assert v < 1e-30

    def test_aligned(self):
        v, _ = c.heterodyne_pair(0.0, 0.0, 0.7, 0.3, 2.0)
        assert v == pytest.approx(1 / 16, rel=1e-14)

    def test_pi_over_6_invariant(self):
        rng = np.random.default_rng(11)
        vals = [c.heterodyne_pair(math.pi / 6, math.pi / 6, *d)[0] for d in rng.uniform(-10, 10, (1000, 3))]
        assert max(vals) - min(vals) < 1e-12 * (1 / 64)
        assert vals[0] == pytest.approx(1 / 64, rel=1e-12)

    def test_term_selection(self):
        _, terms = c.heterodyne_pair(0.3, 0.8, 1.2, 0.4, 0.5)
        assert set(terms.kept) == {(ModeLabel.H_MINUS, ModeLabel.H_PLUS), (ModeLabel.V_PLUS, ModeLabel.V_MINUS)}
        assert set(terms.dropped) == {(ModeLabel.H_MINUS, ModeLabel.V_MINUS), (ModeLabel.V_PLUS, ModeLabel.H_PLUS)}
        assert len(terms.kept) == len(terms.dropped) == 2

    def test_terms_against_printed_algebra(self):
        xi, th, df, tau, phi = 0.3, 0.8, 1.2, 0.4, 0.5
        _, terms = c.heterodyne_pair(xi, th, df, tau, phi)
        P = 0.5 * np.exp(-1j * df * tau)
        beat = np.exp(1j * (2 * df * tau + phi))
        expect = {
            (ModeLabel.H_MINUS, ModeLabel.H_PLUS): 1j * P**2 * math.cos(xi) * math.cos(th) * beat,
            (ModeLabel.V_PLUS, ModeLabel.V_MINUS): -1j * P**2 * math.sin(xi) * math.sin(th) * beat,
            (ModeLabel.H_MINUS, ModeLabel.V_MINUS): 1j * P**2 * math.cos(xi) * math.sin(th),
            (ModeLabel.V_PLUS, ModeLabel.H_PLUS): -1j * P**2 * math.sin(xi) * math.cos(th) * beat**2,
        }
        for key, val in {**terms.kept, **terms.dropped}.items():
            assert val == pytest.approx(expect[key], abs=1e-15)

    @settings(max_examples=200)
    @given(angle, angle, finite, finite, angle)
    def test_law(self, xi, th, df, tau, phi):
        v, _ = c.heterodyne_pair(xi, th, df, tau, phi)
        assert v == pytest.approx(math.cos(xi + th) ** 2 / 16, abs=1e-14)

    @given(angle, angle)
    def test_periodicity(self, xi, th):
        base = c.heterodyne_pair(xi, th, 0.3, 0.2, 0.1)[0]
        assert c.heterodyne_pair(xi + math.pi, th, 0.3, 0.2, 0.1)[0] == pytest.approx(base, abs=1e-14)
        assert c.heterodyne_pair(xi, th + math.pi, 0.3, 0.2, 0.1)[0] == pytest.approx(base, abs=1e-14)


class TestQuantumG2:
    def test_anchor_values(self):
        assert c.quantum_g2(0.0, Q, Q, SIGMA) == pytest.approx(0.0, abs=1e-15)
        assert c.quantum_g2(6 / SIGMA, 0.2, 0.9, SIGMA) == pytest.approx(0.5, abs=1e-3)

    @given(angle, angle)
    def test_zero_delay_equals_pair_law(self, xi, th):
        v = c.heterodyne_pair(xi, th, 0.0, 0.0, 0.0)[0] * 16
        assert c.quantum_g2(0.0, xi, th, SIGMA) == pytest.approx(v, abs=1e-12)

    def test_matches_classical_dip(self, grid):
        tau = np.linspace(0, 6, 241) / SIGMA
        diff = c.quantum_g2(tau, Q, Q, SIGMA) - c.classical_coincidence(grid, Q, Q, 0.0, tau)
        assert np.max(np.abs(diff)) < 1e-3

    @given(st.floats(0, 5), angle, angle)
    def test_bounded(self, tau, xi, th):
        assert -1e-15 <= c.quantum_g2(tau, xi, th, SIGMA) <= 1 + 1e-15


class TestCorrelationE:
    @pytest.mark.parametrize("xi,th,e", [(0, 0, 1.0), (0, Q, 0.0), (Q, Q, -1.0)])
    def test_examples(self, xi, th, e):
        assert c.correlation_E(xi, th) == pytest.approx(e, abs=1e-12)

    def test_four_rates_sum(self):
        xi, th = 0.4, 1.3
        p = math.pi / 2
        total = sum(c.heterodyne_pair(x, t, 0.2, 0.1, 0.3)[0] for x, t in [(xi, th), (xi + p, th), (xi, th + p), (xi + p, th + p)])
        assert total == pytest.approx(1 / 8, rel=1e-12)

    def test_identity_on_degree_grid(self):
        ang = np.deg2rad(np.arange(0, 360))
        E = c.correlation_E(ang[:, None], ang[None, :])
        assert np.max(np.abs(E - np.cos(2 * (ang[:, None] + ang[None, :])))) < 1e-12


class TestCHSH:
    def test_canonical(self):
        s = c.chsh_S(*np.deg2rad([0, 45, -22.5, -67.5]))
        assert s == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    def test_all_zero(self):
        assert c.chsh_S(0, 0, 0, 0) == pytest.approx(2.0, abs=1e-12)

    def test_grid_search_brute_force_small(self):
        # brute force over a coarse 15-degree grid agrees with the separable search
        ang = np.deg2rad(np.arange(0, 180, 15))
        a, ap, b, bp = np.meshgrid(ang, ang, ang, ang, indexing="ij")
        S = c.chsh_S(a, ap, b, bp)
        smax, smin = c.chsh_grid_extremes(15.0)
        assert smax == pytest.approx(S.max(), abs=1e-12)
        assert smin == pytest.approx(S.min(), abs=1e-12)

    def test_one_degree_grid_never_exceeds(self):
        smax, smin = c.chsh_grid_extremes(1.0)
        # -22.5 deg is off this grid, so the optimum is approached, not reached
        assert 2.8 < smax <= 2 * math.sqrt(2) + 1e-9
        assert -2 * math.sqrt(2) - 1e-9 <= smin < -2.8

    def test_half_degree_grid_attains_bound(self):
        smax, smin = c.chsh_grid_extremes(0.5)
        assert smax == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        assert smin == pytest.approx(-2 * math.sqrt(2), abs=1e-9)

    @given(angle, angle, angle, angle)
    def test_tsirelson_form_bound(self, a, ap, b, bp):
        assert abs(c.chsh_S(a, ap, b, bp)) <= 2 * math.sqrt(2) + 1e-12


def test_curve_shape_checks():
    with pytest.raises(ParameterError):
        c.CorrelationCurve("classical_product", [0, 1], [0.0], {})
    with pytest.raises(ParameterError):
        c.CorrelationCurve("other", [0], [0.0], {})
    curve = c.heterodyne_curve(np.linspace(0, 1, 5), Q, Q, SIGMA)
    assert curve.values.shape == (5,)
    assert np.all((curve.values >= 0) & (curve.values <= 1))
