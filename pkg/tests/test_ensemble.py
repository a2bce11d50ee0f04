import math

import numpy as np
import pytest
from scipy import integrate

from hom_coherence.ensemble import (
    GridError,
    OutOfBandError,
    build_spectral_grid,
    build_tau_grid,
    closed_form_g2,
    correlation_curve,
    detuning_trace,
    gaussian_weight,
    mean_intensities,
    paper_spectral_grid,
    paper_tau_grid,
)

# 0.5 - sin(12)/24 and 0.5 - sin(4)/8, mpmath quadrature at 30 digits
G2_DIP_TAU_3E8 = 0.52235720491668479048605725951
G2_DIP_TAU_1E8 = 0.594600311913491031421579886814


def quadrature_g2(eta, bandwidth, tau):
    """Continuum average of cos^2(eta + 2 df tau) over df in [-B, B] by adaptive quadrature."""
    value, _ = integrate.quad(
        lambda df: math.cos(eta + 2 * df * tau) ** 2, -bandwidth, bandwidth, limit=400
    )
    return value / (2 * bandwidth)


def direct_sum_g2(points, eta, tau):
    return sum(math.cos(eta + 2 * df * tau) ** 2 for df in points) / len(points)


@pytest.fixture(scope="module")
def sgrid():
    return paper_spectral_grid()


@pytest.fixture(scope="module")
def tgrid():
    return paper_tau_grid()


class TestGrids:
    def test_paper_spectral_grid(self, sgrid):
        assert len(sgrid) == 101
        assert sgrid.points[0] == -1e8 and sgrid.points[-1] == 1e8
        np.testing.assert_allclose(np.diff(sgrid.points), 2e6, rtol=1e-12)

    def test_minimal_grid(self):
        assert build_spectral_grid(1, 1).points.tolist() == [-1.0, 0.0, 1.0]

    def test_symmetric(self, sgrid):
        assert np.array_equal(sgrid.points, -sgrid.points[::-1])

    @pytest.mark.parametrize("args", [(1e8, 3e6), (0, 1), (1, 0), (-1, 1), (math.inf, 1)])
    def test_spectral_grid_errors(self, args):
        with pytest.raises(GridError):
            build_spectral_grid(*args)

    def test_paper_tau_grid(self, tgrid):
        assert len(tgrid) == 301
        assert 0.0 in tgrid.points
        assert np.array_equal(tgrid.points, -tgrid.points[::-1])

    def test_tau_grid_without_zero(self):
        g = build_tau_grid(1e-9, 3e-9, 1e-9)
        assert g.points == pytest.approx([1e-9, 2e-9, 3e-9])

    @pytest.mark.parametrize("args", [(1e-9, 0.0, 1e-9), (0, 1e-9, 0), (0, 1e-9, 3e-10)])
    def test_tau_grid_errors(self, args):
        with pytest.raises(GridError):
            build_tau_grid(*args)


class TestMeanIntensities:
    @pytest.mark.parametrize("eta,tau", [(math.pi / 2, 0.0), (0.37, 1.7e-8), (0.0, -2.9e-8)])
    def test_uniform(self, sgrid, eta, tau):
        ic, id_ = mean_intensities(sgrid, eta, tau)
        assert ic == pytest.approx(1.0, abs=1e-12)
        assert id_ == pytest.approx(1.0, abs=1e-12)

    def test_single_point(self):
        grid = build_spectral_grid(1, 1)
        grid = type(grid)(grid.bandwidth, grid.step, np.array([0.0]))
        assert mean_intensities(grid, math.pi / 4, 0.0) == pytest.approx((1.0, 1.0), abs=1e-15)

    def test_asymmetric_grid(self):
        grid = build_spectral_grid(1e8, 2e6)
        grid = type(grid)(grid.bandwidth, grid.step, grid.points[60:])
        assert mean_intensities(grid, 1.1, 2.3e-8) == pytest.approx((1.0, 1.0), abs=1e-12)

    def test_empty(self):
        grid = build_spectral_grid(1, 1)
        with pytest.raises(GridError):
            mean_intensities(type(grid)(1, 1, np.array([])), 0.0, 0.0)


class TestCorrelationCurve:
    def test_dip(self, sgrid, tgrid):
        curve = correlation_curve(sgrid, tgrid, math.pi / 2)
        assert curve.g2[tgrid.points == 0.0][0] == 0.0

    def test_floor(self, sgrid, tgrid):
        curve = correlation_curve(sgrid, tgrid, math.pi / 4)
        np.testing.assert_allclose(curve.g2, 0.5, atol=1e-12, rtol=0)

    def test_peak(self, sgrid, tgrid):
        curve = correlation_curve(sgrid, tgrid, 0.0)
        assert curve.g2[tgrid.points == 0.0][0] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("eta", [0.0, 0.3, math.pi / 2, 2.0])
    def test_bounds_and_time_symmetry(self, sgrid, tgrid, eta):
        curve = correlation_curve(sgrid, tgrid, eta)
        assert np.all((curve.g2 >= 0) & (curve.g2 <= 1))
        assert np.array_equal(curve.g2, curve.g2[::-1])
        np.testing.assert_allclose(curve.ic_mean, 1.0, atol=1e-12, rtol=0)
        np.testing.assert_allclose(curve.id_mean, 1.0, atol=1e-12, rtol=0)

    @pytest.mark.parametrize("eta", [0.0, math.pi / 2, 0.9])
    def test_matches_direct_sum(self, sgrid, tgrid, eta):
        curve = correlation_curve(sgrid, tgrid, eta)
        expected = [direct_sum_g2(sgrid.points, eta, t) for t in tgrid.points]
        np.testing.assert_allclose(curve.g2, expected, atol=1e-12, rtol=0)

    def test_envelope(self, sgrid, tgrid):
        curve = correlation_curve(sgrid, tgrid, math.pi / 2)
        nz = tgrid.points != 0
        bound = 1 / (8 * sgrid.bandwidth * np.abs(tgrid.points[nz]))
        assert np.all(np.abs(curve.g2[nz] - 0.5) <= bound)

    def test_order_independent(self, sgrid, tgrid):
        whole = correlation_curve(sgrid, tgrid, 1.2).g2
        pieces = [
            correlation_curve(sgrid, build_tau_grid(t, t, tgrid.step), 1.2).g2[0]
            for t in tgrid.points[::-1]
        ]
        assert np.array_equal(whole, pieces[::-1])

    def test_gaussian_weight_off_by_default(self, sgrid, tgrid):
        flat = correlation_curve(sgrid, tgrid, math.pi / 2)
        narrow = correlation_curve(sgrid, tgrid, math.pi / 2, weight=gaussian_weight(2e7))
        assert narrow.g2[150] == 0.0
        # narrower spectrum dephases more slowly
        assert narrow.g2[160] < flat.g2[160]
        np.testing.assert_allclose(narrow.ic_mean, 1.0, atol=1e-12, rtol=0)


class TestClosedForm:
    @pytest.mark.parametrize("eta", [0.0, math.pi / 4, math.pi / 2, 1.1])
    @pytest.mark.parametrize("tau", [0.0, 3e-9, 1e-8, -2.2e-8, 3e-8])
    def test_against_quadrature(self, eta, tau):
        assert closed_form_g2(eta, 1e8, tau) == pytest.approx(
            quadrature_g2(eta, 1e8, tau), abs=1e-10
        )

    def test_frozen_values(self):
        assert closed_form_g2(math.pi / 2, 1e8, 3e-8) == pytest.approx(G2_DIP_TAU_3E8, abs=1e-14)
        assert closed_form_g2(math.pi / 2, 1e8, 1e-8) == pytest.approx(G2_DIP_TAU_1E8, abs=1e-14)

    def test_trivial_limits(self):
        assert closed_form_g2(math.pi / 2, 5e7, 0.0) == 0.0
        assert closed_form_g2(math.pi / 4, 1e8, 1.3e-8) == pytest.approx(0.5, abs=1e-15)

    def test_vectorized(self, tgrid):
        out = closed_form_g2(0.0, 1e8, tgrid.points)
        assert out.shape == tgrid.points.shape

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(GridError):
            closed_form_g2(0.0, 0.0, 1e-9)

    def test_grid_agreement(self, sgrid, tgrid):
        for eta in (0.0, math.pi / 2, 0.6):
            curve = correlation_curve(sgrid, tgrid, eta)
            oracle = closed_form_g2(eta, sgrid.bandwidth, tgrid.points)
            assert np.max(np.abs(curve.g2 - oracle)) <= 0.01

    def test_refinement_converges(self, tgrid):
        errors = []
        for step in (2e6, 1e6, 5e5):
            curve = correlation_curve(build_spectral_grid(1e8, step), tgrid, math.pi / 2)
            errors.append(np.mean(np.abs(curve.g2 - closed_form_g2(math.pi / 2, 1e8, tgrid.points))))
        assert errors[0] > errors[1] > errors[2]


class TestDetuningTrace:
    def test_zero_detuning(self, tgrid):
        assert np.all(detuning_trace(0.0, math.pi / 2, tgrid).product == 0.0)
        assert np.all(detuning_trace(0.0, 0.0, tgrid).product == 1.0)

    def test_detuned_point(self):
        trace = detuning_trace(5e7, math.pi / 2, build_tau_grid(1e-8, 1e-8, 1e-8))
        assert trace.product[0] == pytest.approx(0.70807341827357119, abs=1e-12)

    @pytest.mark.parametrize("df", [0.0, 5e7, 1e8, -3e7])
    def test_cos_squared(self, tgrid, df):
        trace = detuning_trace(df, math.pi / 2, tgrid)
        np.testing.assert_allclose(
            trace.product, np.cos(math.pi / 2 + 2 * df * tgrid.points) ** 2, atol=1e-12, rtol=0
        )

    def test_out_of_band(self, tgrid):
        with pytest.raises(OutOfBandError):
            detuning_trace(2e8, 0.0, tgrid, bandwidth=1e8)
