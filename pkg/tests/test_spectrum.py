"""
Tests for spectral lines, the secular equation and its roots
"""
import numpy as np
import pytest
import sympy

from app.core.config import settings
from app.services.spectrum import (
    DELTA_AT_I,
    HeightAdjustmentExhaustedError,
    ThetaProvider,
    build_line,
    discrete_roots,
    eigenvalue_candidates,
    lambda_of,
    tail_stability,
    theta_v,
    theta_v_complex,
    theta_zeros,
)
from app.services.spectrum.secular import PoleProximityError, derivative_certificate, off_line_check
from app.services.spectrum.theta import UnknownProviderError, get_provider
from app.services.symbolic.presets import s, sf, w

FIRST_ZETA_ZERO = 14.134725141734693790
FIRST_CHI4_ZERO = 6.020948904697597


def sign_changes(line, j, points=2000):
    """Dense sign scan of theta_v over one bracket, endpoints taken just inside the poles"""
    lo, hi = line.zeros[j].t, line.zeros[j + 1].t
    grid = np.concatenate(([lo + 1e-9], np.linspace(lo, hi, points)[1:-1], [hi - 1e-9]))
    values = np.array([theta_v(line, x) if min(x - lo, hi - x) >= 1e-6 else np.nan for x in grid])
    values[0] = 1.0
    values[-1] = -1.0
    signs = np.sign(values[~np.isnan(values)])
    return int(np.sum(signs[:-1] != signs[1:]))


class TestLambdaModels:
    """Test the Casimir eigenvalue models"""

    def test_gl2_on_line(self):
        """lambda(1/2 + it) = -1/4 - t^2"""
        assert lambda_of(0.5 + 3j) == pytest.approx(-0.25 - 9.0)

    def test_gl2_roots(self):
        assert lambda_of(0.0) == 0
        assert lambda_of(1.0) == 0

    def test_gl4_difference_identity(self):
        """lambda(s) - lambda(w) = 4 (s(s-1) - w(w-1)) in the gl4 model"""
        difference = lambda_of(s, "gl4", sf) - lambda_of(w, "gl4", sf)
        assert sympy.expand(difference - 4 * (s * (s - 1) - w * (w - 1))) == 0

    def test_gl4_numeric(self):
        value = lambda_of(0.5 + 2j, "gl4", 0.25)
        expected = 4 * (0.5 + 2j) ** 2 + 4 * 0.25 ** 2 - 8 * 0.25 - 4 * (0.5 + 2j)
        assert abs(value - expected) < 1e-12


class TestSpectralLine:
    """Test build_line at a = 3, t <= 60"""

    def test_weights_positive(self, line_a3):
        assert len(line_a3) > 30
        assert np.all(line_a3.weights > 0)
        assert np.all(line_a3.norm_sq > 0)
        assert line_a3.adjustments == 0

    def test_eigenvalues_decrease(self, line_a3):
        assert np.all(np.diff(line_a3.eigenvalues) < 0)

    def test_reflected_weights(self, line_a3, datum):
        """Evaluating the period at 1 - s_j leaves every weight unchanged"""
        reflected = build_line(3.0, 60.0, DELTA_AT_I, datum=datum, reflected=True)
        np.testing.assert_allclose(reflected.weights, line_a3.weights, rtol=1e-9)
        assert reflected.metadata["weight_point"] == "1 - s_j"

    @pytest.mark.slow
    def test_extended_precision_weights(self, line_a3, datum):
        """Extended-precision periods move no weight by more than 1e-7 relative"""
        extended = build_line(3.0, 60.0, DELTA_AT_I, precision="extended", datum=datum)
        np.testing.assert_allclose(extended.weights, line_a3.weights, rtol=1e-7)

    def test_height_adjustment(self, line_a3, datum):
        """A period vanishing at the first zero bumps a by one percent"""
        t_star = line_a3.zeros[0].t

        def vanishing_at_first_zero(points):
            return np.where(np.abs(np.imag(points) - t_star) < 1e-9, 0.0, 1.0) + 0j

        provider = ThetaProvider(name="test-vanishing", evaluator=vanishing_at_first_zero)
        line = build_line(3.0, 20.0, provider, datum=datum)
        assert line.adjustments == 1
        assert line.a == pytest.approx(3.03)
        assert line.requested_a == 3.0

    def test_height_adjustment_exhausted(self, datum):
        provider = ThetaProvider(name="test-zero", evaluator=lambda points: np.zeros_like(points))
        with pytest.raises(HeightAdjustmentExhaustedError):
            build_line(3.0, 20.0, provider, datum=datum)

    def test_unknown_provider(self):
        with pytest.raises(UnknownProviderError):
            get_provider("nowhere")


class TestThetaV:
    """Test the secular function"""

    def test_pole_signs(self, line_a3):
        """+inf just above each zero, -inf just below the next"""
        for j in range(10):
            lo, hi = line_a3.zeros[j].t, line_a3.zeros[j + 1].t
            assert theta_v(line_a3, lo + 2e-6) > 0
            assert theta_v(line_a3, hi - 2e-6) < 0

    def test_pole_guard(self, line_a3):
        with pytest.raises(PoleProximityError):
            theta_v(line_a3, line_a3.zeros[3].t + 1e-8)

    def test_real_on_line(self, line_a3):
        """theta_v is real for real tau"""
        tau = 0.5 * (line_a3.zeros[5].t + line_a3.zeros[6].t)
        value = theta_v_complex(line_a3, 0.5 + 1j * tau)
        assert abs(value.imag) <= 1e-9 * max(1.0, abs(value.real))
        assert value.real == pytest.approx(theta_v(line_a3, tau), rel=1e-9, abs=1e-12)

    def test_off_line_imaginary_part(self, line_a3):
        """Off the line the imaginary part is at least the largest single term's"""
        for w_point in (0.7 + 10.3j, 0.2 + 25.0j, 1.5 + 40.0j):
            assert off_line_check(line_a3, w_point)["bounded_away"]


class TestDiscreteRoots:
    """Test interlacing and simplicity"""

    def test_one_root_per_bracket(self, line_a3, roots_a3):
        assert len(roots_a3) == len(line_a3) - 1
        assert len(roots_a3) >= 30
        for root in roots_a3:
            lo, hi = root.bracket
            assert lo < root.tau < hi

    def test_sign_scan_oracle(self, line_a3):
        """A dense scan finds exactly one sign change in each of the first 30 brackets"""
        for j in range(30):
            assert sign_changes(line_a3, j) == 1

    def test_derivative_certificates(self, line_a3, roots_a3):
        """Every root is simple"""
        assert all(root.deriv_cert > 0 for root in roots_a3)
        root = roots_a3[4]
        assert derivative_certificate(line_a3, root.tau) == pytest.approx(root.deriv_cert)

    def test_residuals(self, roots_a3):
        assert max(root.residual for root in roots_a3) < 1e-7

    def test_gl4_model_has_same_roots(self, line_a3, datum, roots_a3):
        """Rescaling every denominator by 4 cannot move a root"""
        line = build_line(3.0, 60.0, DELTA_AT_I, datum=datum, model="gl4", sf=0.3)
        roots = discrete_roots(line, brackets=10)
        for a, b in zip(roots, roots_a3[:10]):
            assert a.tau == pytest.approx(b.tau, abs=1e-9)

    @pytest.mark.slow
    def test_tail_doubling(self, line_a3, datum):
        """Doubling the retained terms keeps one interior root per bracket, but not to 1e-7"""
        report = tail_stability(line_a3, datum=datum)
        assert report.base_terms == len(line_a3)
        assert report.compared == len(line_a3) - 1
        assert report.comparison_t_max > 60.0
        assert report.same_count
        assert report.all_interior
        # the truncated tail moves the roots far more than the default tolerance
        assert report.max_absolute_move > settings.TAIL_STABILITY_TOL
        assert report.verdict == "unstable"
        assert np.median(report.relative_moves[:10]) < 0.1

    @pytest.mark.slow
    def test_tail_verdict_follows_tolerance(self, line_a3, datum):
        report = tail_stability(line_a3, tolerance=float("inf"), datum=datum)
        assert report.verdict == "stable"


class TestCandidates:
    """Test the sparsity cross-check"""

    def test_theta_zeros(self):
        """Zeros of zeta and L(chi_-4) are both found"""
        zs = theta_zeros(DELTA_AT_I, 60.0)
        assert np.min(np.abs(zs - FIRST_ZETA_ZERO)) < 1e-9
        assert np.min(np.abs(zs - FIRST_CHI4_ZERO)) < 1e-9
        assert np.all(np.diff(zs) > 0)

    def test_sparsity(self, line_a3, roots_a3):
        report = eigenvalue_candidates(line_a3, roots_a3)
        assert len(report.matches) <= 2
        assert report.verdict == "sparsity consistent"
        assert report.histogram.sum() == len(roots_a3)

    def test_zeros_bracketed(self, line_a3, roots_a3):
        """Every period zero above t_1 falls inside a bracket"""
        report = eigenvalue_candidates(line_a3, roots_a3)
        first = line_a3.zeros[0].t
        for zero, bracket in zip(report.theta_zeros, report.zero_brackets):
            if zero > first:
                assert bracket is not None

    def test_zero_abscissas_do_not_depend_on_height(self, line_a3, roots_a3, datum):
        other = build_line(3.5, 60.0, DELTA_AT_I, datum=datum)
        other_roots = discrete_roots(other, brackets=5)
        first = eigenvalue_candidates(line_a3, roots_a3)
        second = eigenvalue_candidates(other, other_roots)
        common = min(first.theta_zeros.size, second.theta_zeros.size)
        np.testing.assert_allclose(first.theta_zeros[:common], second.theta_zeros[:common], rtol=0, atol=1e-12)
        assert other_roots[0].tau != roots_a3[0].tau
