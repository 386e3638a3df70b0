import math

import mpmath
import numpy as np
import pytest
from scipy import special

from lognormal_surrogates.exceptions import (
    ParameterError, DomainError, PoleError, BesselOverflow, ContourPlacementError, DecayCheckFailed,
)
from lognormal_surrogates.specfun import (
    log_gamma, digamma, trigamma, upper_incomplete_gamma, log_pochhammer, bessel_i, log_bessel_i, log_bessel_ive,
    kummer_1f1, kummer_1f1_da_at_zero, gauss_2f1,
    MeijerGSpec, FoxHSpec, ContourConfig, meijer_g, meijer_g_from, fox_h, fox_h_from, log_meijer_g,
)

from conftest import assert_close


class TestGammaFamilySuite:

    @pytest.mark.parametrize("z, expected", [
        (0.5, 0.5 * math.log(math.pi)),
        (5.0, math.log(24.0)),
        (1.0, 0.0),
        (-0.5, math.log(2 * math.sqrt(math.pi))),
    ])
    def test_log_gamma(self, z, expected):
        """Test log Gamma on the real line, including negative non-integers"""
        value = log_gamma(z)
        assert abs(value.real - expected) < 1e-13

    @pytest.mark.parametrize("z", [0, -1, -3.0])
    def test_log_gamma_poles(self, z):
        with pytest.raises(PoleError) as exc:
            log_gamma(z)
        assert "log_gamma has a pole" in exc.value.render(color=False)

    def test_log_gamma_complex(self):
        z = complex(1.5, 2.0)
        assert abs(log_gamma(z) - complex(mpmath.loggamma(mpmath.mpc(1.5, 2.0)))) < 1e-13

    def test_digamma_trigamma(self):
        assert abs(digamma(1.0) + np.euler_gamma) < 1e-14
        assert abs(trigamma(1.0) - math.pi ** 2 / 6) < 1e-14
        values = trigamma(np.array([1.0, 2.0]))
        assert values.shape == (2,)
        assert abs(values[1] - (math.pi ** 2 / 6 - 1)) < 1e-14

    @pytest.mark.parametrize("func", [digamma, trigamma])
    def test_polygamma_domain(self, func):
        with pytest.raises(DomainError):
            func(0.0)
        with pytest.raises(DomainError):
            func(np.array([1.0, -2.0]))

    def test_upper_incomplete_gamma(self):
        assert_close(upper_incomplete_gamma(1.0, 2.0), math.exp(-2.0), rel=1e-14)
        assert_close(upper_incomplete_gamma(3.0, 0.0), 2.0, rel=1e-14)
        assert_close(upper_incomplete_gamma(10.0, 12.0), float(mpmath.gammainc(10, 12)), rel=1e-12)
        with pytest.raises(DomainError):
            upper_incomplete_gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            upper_incomplete_gamma(1.0, -1.0)

    def test_log_pochhammer(self):
        assert abs(log_pochhammer(2.0, 3.0) - math.log(24.0)) < 1e-13
        assert abs(log_pochhammer(1.5, 0.5) - (math.lgamma(2.0) - math.lgamma(1.5))) < 1e-14


class TestBesselHypergeometricSuite:

    def test_bessel_i(self):
        assert_close(bessel_i(0.5, 2.0), math.sqrt(2 / (math.pi * 2.0)) * math.sinh(2.0), rel=1e-13)

    def test_bessel_i_overflow(self):
        with pytest.raises(BesselOverflow) as exc:
            bessel_i(0.0, 701.0)
        assert "use log_bessel_i" in exc.value.render(color=False)

    @pytest.mark.parametrize("order, x", [(0.0, 1000.0), (2.5, 5000.0), (1.0, 3.0), (1.16, 1e10), (0.5, 1e20)])
    def test_log_bessel_i(self, order, x):
        """Test the logarithm stays finite and accurate beyond the overflow limit"""
        expected = float(mpmath.log(mpmath.besseli(order, x)))
        assert_close(log_bessel_i(order, x), expected, rel=1e-12)

    def test_log_bessel_ive_huge_arguments(self):
        x = np.array([2.0, 1e12, 1e20])
        values = log_bessel_ive(3.03, x)
        assert np.all(np.isfinite(values))
        expected = [float(mpmath.log(mpmath.besseli(3.03, v) * mpmath.exp(-v))) for v in x]
        assert np.allclose(values, expected, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("a, b, z", [(0.5, 1.5, -20.0), (2.3, 1.7, 5.0), (-0.5, 3.0, -2.0)])
    def test_kummer_1f1(self, a, b, z):
        assert_close(kummer_1f1(a, b, z), float(mpmath.hyp1f1(a, b, z)), rel=1e-10)

    def test_kummer_1f1_pole(self):
        with pytest.raises(PoleError):
            kummer_1f1(1.0, -2.0, 1.0)

    @pytest.mark.parametrize("b, z", [(1.5, 3.0), (2.0, -4.0), (0.7, 30.0), (3.0, -25.0)])
    def test_kummer_1f1_da_at_zero(self, b, z):
        """Test the a-derivative series against numerical differentiation at high precision"""
        with mpmath.workdps(30):
            expected = float(mpmath.diff(lambda a: mpmath.hyp1f1(a, b, z), 0))
        assert_close(kummer_1f1_da_at_zero(b, z), expected, rel=1e-9)

    def test_kummer_1f1_da_at_zero_origin(self):
        assert kummer_1f1_da_at_zero(2.0, 0.0) == 0.0
        with pytest.raises(DomainError):
            kummer_1f1_da_at_zero(0.0, 1.0)

    def test_gauss_2f1(self):
        assert_close(gauss_2f1(1.0, 1.0, 2.0, -0.5), math.log(1.5) / 0.5, rel=1e-13)
        with pytest.raises(DomainError):
            gauss_2f1(1.0, 1.0, 2.0, 1.0)
        with pytest.raises(PoleError):
            gauss_2f1(1.0, 1.0, -2.0, 0.5)


class TestMeijerGSuite:

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    def test_exponential(self, x, tight):
        """Test G^{1,0}_{0,1}(x | -; 0) = exp(-x)"""
        assert_close(meijer_g_from(1, 0, (), (0.0,), x, tight), math.exp(-x), rel=1e-9)

    @pytest.mark.parametrize("x", [0.2, 1.0, 9.0])
    def test_logarithm(self, x, tight):
        """Test G^{1,2}_{2,2}(x | 1, 1; 1, 0) = log(1 + x)"""
        assert_close(meijer_g_from(1, 2, (1.0, 1.0), (1.0, 0.0), x, tight), math.log1p(x), rel=1e-9)

    @pytest.mark.parametrize("b1, b2, x", [(1.0, 2.5, 0.7), (5.48, 5.48, 3.0), (0.3, 2.0, 20.0)])
    def test_bessel_k(self, b1, b2, x, tight):
        """Test G^{2,0}_{0,2}(x | -; b1, b2) = 2 x^((b1+b2)/2) K_{b1-b2}(2 sqrt(x))"""
        expected = 2 * x ** ((b1 + b2) / 2) * special.kv(b1 - b2, 2 * math.sqrt(x))
        assert_close(meijer_g_from(2, 0, (), (b1, b2), x, tight), expected, rel=1e-8)

    @pytest.mark.parametrize("m, n, a_params, b_params, x", [
        (2, 1, (1.0,), (1.5, 0.5), 2.0),
        (3, 1, (0.0, 1.0), (0.0, 0.0, 2.5), 1.3),
        (0, 2, (-1.5, -0.5), (), 0.8),
        (3, 2, (1.0, 0.0), (1.2, 2.0, 3.1, 0.0), 0.05),
    ])
    def test_against_mpmath(self, m, n, a_params, b_params, x, tight):
        """Test against mpmath's Meijer-G, including repeated parameters"""
        expected = float(mpmath.meijerg([list(a_params[:n]), list(a_params[n:])],
                                        [list(b_params[:m]), list(b_params[m:])], x))
        assert_close(meijer_g_from(m, n, a_params, b_params, x, tight), expected, rel=1e-8)

    def test_log_prefactor(self, tight):
        spec = MeijerGSpec(1, 0, (), (0.0,), 1.0)
        assert_close(meijer_g(spec, tight, math.log(3.0)), 3 * math.exp(-1.0), rel=1e-9)
        sign, log_abs = log_meijer_g(spec, tight)
        assert sign == 1.0
        assert abs(log_abs + 1.0) < 1e-9

    def test_log_argument(self, tight):
        """Test arguments given by their logarithm, including ones outside double range"""
        spec = MeijerGSpec(1, 0, (), (0.0,), log_x=math.log(2.0))
        assert spec.x == pytest.approx(2.0)
        assert_close(meijer_g(spec, tight), math.exp(-2.0), rel=1e-9)
        # G^{1,0}_{0,1}(x | -; 1) = x e^-x
        tiny = MeijerGSpec(1, 0, (), (1.0,), log_x=-800.0)
        assert tiny.x == 0.0
        assert "exp(-800)" in str(tiny)
        sign, log_abs = log_meijer_g(tiny, tight)
        assert sign == 1.0
        assert abs(log_abs + 800.0) < 1e-6
        assert meijer_g(tiny, tight) == 0.0

    @pytest.mark.parametrize("kwargs", [dict(), dict(log_x=math.inf), dict(log_x=math.nan)])
    def test_invalid_log_argument(self, kwargs):
        with pytest.raises(ParameterError):
            MeijerGSpec(1, 0, (), (0.0,), **kwargs)

    def test_explicit_shift(self):
        cfg = ContourConfig(shift=2.0, rtol=1e-10)
        assert_close(meijer_g_from(1, 0, (), (0.0,), 1.0, cfg), math.exp(-1.0), rel=1e-9)

    def test_pole_collision(self):
        with pytest.raises(PoleError):
            MeijerGSpec(1, 1, (1.0,), (0.0,), 0.5)

    @pytest.mark.parametrize("m, n, a_params, b_params, x", [
        (0, 0, (), (1.0,), 1.0),
        (2, 0, (), (1.0,), 1.0),
        (1, 0, (), (0.0,), 0.0),
        (1, 0, (), (math.inf,), 1.0),
    ])
    def test_invalid_spec(self, m, n, a_params, b_params, x):
        with pytest.raises(ParameterError):
            MeijerGSpec(m, n, a_params, b_params, x)

    def test_no_contour_gap(self):
        """Test overlapping pole families are reported instead of integrated"""
        with pytest.raises(ContourPlacementError):
            meijer_g_from(1, 1, (0.7,), (-0.6,), 1.0)

    def test_shift_outside_gap(self):
        with pytest.raises(ContourPlacementError):
            meijer_g_from(1, 0, (), (0.0,), 1.0, ContourConfig(shift=-1.0))

    def test_no_decay(self):
        with pytest.raises(DecayCheckFailed):
            meijer_g_from(1, 0, (0.5,), (0.0,), 0.5)

    @pytest.mark.parametrize("kwargs", [dict(rtol=0.0), dict(rtol=1.0), dict(nodes=32), dict(half_height=0.0)])
    def test_contour_config_validation(self, kwargs):
        with pytest.raises(ParameterError):
            ContourConfig(**kwargs)


class TestFoxHSuite:

    @pytest.mark.parametrize("b, scale, x", [(0.5, 2.0, 1.7), (1.0, 0.5, 0.3), (2.0, 1.5, 4.0)])
    def test_stretched_exponential(self, b, scale, x, tight):
        """Test H^{1,0}_{0,1}(x | -; (b, B)) = x^(b/B) exp(-x^(1/B)) / B"""
        expected = x ** (b / scale) * math.exp(-x ** (1 / scale)) / scale
        assert_close(fox_h_from(1, 0, (), ((b, scale),), x, tight), expected, rel=1e-8)

    def test_unit_scales_match_meijer(self, tight):
        spec = MeijerGSpec(3, 1, (0.0, 1.0), (0.0, 0.0, 2.5), 1.3)
        assert_close(fox_h(spec.to_fox(), tight), meijer_g(spec, tight), rel=1e-12)

    def test_invalid_scale(self):
        with pytest.raises(ParameterError):
            FoxHSpec(1, 0, (), ((0.0, 0.0),), 1.0)
