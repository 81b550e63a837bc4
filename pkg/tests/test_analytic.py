"""
Tests for special functions and completed L-functions
"""
import math

import mpmath
import numpy as np
import pytest

from app.services.analytic import (
    CHI4,
    DEDEKIND,
    ZETA,
    GammaPoleError,
    ZetaPoleError,
    completed,
    dedekind_gaussian,
    dirichlet_L_chi4,
    hardy_z,
    hurwitz_zeta,
    lngamma,
    load_lfunction_spec,
    riemann_von_mangoldt,
    xi,
    zeta,
)
from app.services.analytic import precision
from app.services.analytic.extrapolation import ExtrapolationUnstableError, extrapolate_limit, richardson
from app.services.analytic.lfunction import LFunctionSpecError

FIRST_ZETA_ZERO = 14.134725141734693790
FIRST_CHI4_ZERO = 6.020948904697597


def strip_grid():
    return [complex(x, y) for x in (0.1, 0.3, 0.6, 0.8) for y in (-7.0, 0.5, 3.0, 12.0, 25.0)]


class TestLogGamma:
    """Test lngamma against mpmath"""

    @pytest.mark.parametrize("z", [0.5, 1.5 + 2j, 0.1 - 30j, -2.5 + 0.5j, 40 + 1j, 3.0])
    def test_matches_mpmath(self, z):
        """Principal branch agrees with mpmath.loggamma"""
        expected = complex(mpmath.loggamma(z))
        assert abs(lngamma(z) - expected) < 1e-12 * max(1.0, abs(expected))

    def test_vectorised(self):
        """Arrays evaluate elementwise"""
        zs = np.array([1.0 + 1j, 2.0 + 5j, 0.25 + 0j])
        values = lngamma(zs)
        assert values.shape == (3,)
        assert abs(values[2] - complex(mpmath.loggamma(0.25))) < 1e-12

    def test_recursion_on_random_points(self):
        """lngamma(z + 1) = lngamma(z) + log z up to a multiple of 2 pi i"""
        rng = np.random.default_rng(0)
        zs = rng.uniform(0.1, 5.0, 200) + 1j * rng.uniform(-100.0, 100.0, 200)
        for z in zs:
            step = lngamma(z + 1) - lngamma(z) - np.log(z)
            step = complex(step.real, step.imag - 2 * math.pi * round(step.imag / (2 * math.pi)))
            assert abs(step) < 1e-11 * max(1.0, abs(lngamma(z + 1)))

    def test_pole_raises(self):
        """Non-positive integers are poles"""
        with pytest.raises(GammaPoleError):
            lngamma(-3.0)


class TestZeta:
    """Test the Euler-Maclaurin zeta"""

    def test_zeta_two(self):
        """zeta(2) = pi^2 / 6"""
        assert abs(zeta(2.0) - math.pi ** 2 / 6) < 1e-12

    def test_first_critical_zero(self):
        """zeta vanishes at the first critical zero"""
        assert abs(zeta(complex(0.5, FIRST_ZETA_ZERO))) < 1e-6

    @pytest.mark.parametrize("s", [0.5 + 14j, 2.0 + 50j, -1.5 + 3j, 0.3 + 99j, 1.0 + 1e-3j])
    def test_matches_mpmath(self, s):
        """Agreement with mpmath.zeta across the plane"""
        expected = complex(mpmath.zeta(s))
        assert abs(zeta(s) - expected) < 1e-10 * max(1.0, abs(expected))

    def test_zeta_zero(self):
        """zeta(0) = -1/2"""
        assert abs(zeta(0.0) - (-0.5)) < 1e-12

    def test_pole(self):
        """s = 1 is rejected"""
        with pytest.raises(ZetaPoleError):
            zeta(1.0)

    def test_conjugation_symmetry(self):
        """zeta(conj s) = conj zeta(s)"""
        s = complex(0.7, 21.3)
        assert abs(zeta(s.conjugate()) - zeta(s).conjugate()) < 1e-12

    def test_hurwitz_reduces_to_zeta(self):
        """zeta(s, 1) = zeta(s)"""
        s = complex(0.5, 10.0)
        assert abs(hurwitz_zeta(s, 1.0) - zeta(s)) < 1e-10


class TestDirichletAndDedekind:
    """Test L(s, chi_-4) and the Dedekind zeta of Q(i)"""

    @pytest.mark.parametrize("s", [0.5 + 6j, 1.0 + 0j, 2.0 + 20j, 0.5 + 60j])
    def test_chi4_matches_mpmath(self, s):
        """Agreement with mpmath.dirichlet"""
        expected = complex(mpmath.dirichlet(s, [0, 1, 0, -1]))
        assert abs(dirichlet_L_chi4(s) - expected) < 1e-10 * max(1.0, abs(expected))

    def test_chi4_at_one(self):
        """L(1, chi_-4) = pi / 4"""
        assert abs(dirichlet_L_chi4(1.0) - math.pi / 4) < 1e-12

    def test_chi4_at_two_is_catalan(self):
        """L(2, chi_-4) is Catalan's constant"""
        assert abs(dirichlet_L_chi4(2.0) - float(mpmath.catalan)) < 1e-12

    def test_dedekind_at_two(self):
        """zeta_Q(i)(2) = (pi^2 / 6) * Catalan"""
        assert abs(dedekind_gaussian(2.0) - math.pi ** 2 / 6 * float(mpmath.catalan)) < 1e-12

    def test_dedekind_factorisation(self):
        """zeta_Q(i) = zeta * L(chi_-4)"""
        s = complex(0.5, 17.0)
        expected = complex(mpmath.zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1]))
        assert abs(dedekind_gaussian(s) - expected) < 1e-10 * max(1.0, abs(expected))


class TestCompletedFunctions:
    """Test functional equations of the completed functions"""

    def test_xi_symmetry(self):
        """xi(s) = xi(1 - s) on a strip grid"""
        for s in strip_grid():
            assert abs(xi(s) - xi(1 - s)) < 1e-10

    @pytest.mark.parametrize("spec", [CHI4, DEDEKIND])
    def test_functional_equation(self, spec):
        """Lambda(s) = Lambda(1 - s)"""
        for s in strip_grid()[:10]:
            value = completed(spec, s)
            assert abs(value - completed(spec, 1 - s)) < 1e-9 * max(1.0, abs(value))

    def test_xi_matches_oracle(self):
        """Double-precision xi agrees with the extended oracle"""
        s = complex(0.25, 8.0)
        with precision.extended():
            expected = complex(precision.mp_xi(s))
        assert abs(xi(s) - expected) < 1e-11

    @pytest.mark.parametrize("spec", [ZETA, CHI4, DEDEKIND])
    def test_completed_matches_oracle(self, spec):
        """Double-precision Lambda agrees with the mpmath completed function"""
        for s in (2.0 + 0j, 0.3 + 7j, 1.5 + 20j):
            with precision.extended():
                expected = complex(precision.mp_completed(spec, s))
            assert abs(completed(spec, s) - expected) < 1e-8 * abs(expected)

    def test_hardy_z_is_real_and_changes_sign(self):
        """The rotated function is real with a sign change at the first zero"""
        assert hardy_z(ZETA, FIRST_ZETA_ZERO - 0.01) * hardy_z(ZETA, FIRST_ZETA_ZERO + 0.01) < 0
        assert hardy_z(CHI4, FIRST_CHI4_ZERO - 0.01) * hardy_z(CHI4, FIRST_CHI4_ZERO + 0.01) < 0

    def test_smooth_count(self):
        """Riemann-von Mangoldt count is within one of the true zeta count at T = 50"""
        # ten zeta zeros lie below 50
        assert abs(riemann_von_mangoldt(ZETA, 50.0) - 10) < 1.0


class TestExtendedOracle:
    """Test double precision against the mpmath oracle on random points"""

    @pytest.mark.parametrize("name,function", [("zeta", zeta), ("chi4", dirichlet_L_chi4),
                                               ("dedekind", dedekind_gaussian)])
    def test_random_sample(self, name, function):
        rng = np.random.default_rng(1)
        points = rng.uniform(-1.0, 3.0, 25) + 1j * rng.uniform(1.0, 80.0, 25)
        for s in points:
            with precision.extended():
                expected = complex(precision.mp_L(name, complex(s)))
            assert abs(function(complex(s)) - expected) < 1e-9 * max(1.0, abs(expected))


class TestLFunctionFile:
    """Test user L-function definitions"""

    def test_load_truncated_zeta(self, tmp_path):
        """A coefficient file of ones evaluates zeta(3)"""
        lines = ["# name: ones", "# degree: 1", "# gamma: 1/2,0,0", f"# conductor: {math.pi ** -0.5}",
                 "# poles: 1,0"]
        lines += [f"{n},1" for n in range(1, 2001)]
        path = tmp_path / "ones.csv"
        path.write_text("\n".join(lines))
        spec = load_lfunction_spec(path)
        assert spec.degree == 1
        assert abs(spec.L(3.0) - float(mpmath.zeta(3))) < 1e-6

    def test_missing_header(self, tmp_path):
        """Files without a degree header are rejected"""
        path = tmp_path / "bad.csv"
        path.write_text("# name: bad\n# gamma: 1/2,0,0\n# conductor: 1\n1,1\n")
        with pytest.raises(LFunctionSpecError):
            load_lfunction_spec(path)


class TestExtrapolation:
    """Test Richardson extrapolation"""

    def test_polynomial_limit(self):
        """Quadratic error terms are removed exactly"""
        value = extrapolate_limit(lambda e: 2.0 + 3.0 * e - e ** 2, (0.1, 0.05, 0.025))
        assert abs(value - 2.0) < 1e-12

    def test_tableau_shape(self):
        """One estimate per column"""
        assert richardson([1.0, 1.0, 1.0, 1.0]).shape == (4,)

    def test_unstable_raises(self):
        """A tolerance violation raises"""
        with pytest.raises(ExtrapolationUnstableError):
            extrapolate_limit(lambda e: math.sin(1.0 / e), (0.1, 0.05, 0.025), tolerance=1e-12)

    def test_non_geometric_rejected(self):
        with pytest.raises(ValueError):
            extrapolate_limit(lambda e: e, (0.1, 0.07, 0.01))
