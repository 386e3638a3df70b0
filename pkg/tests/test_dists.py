import math

import numpy as np
import pytest
from scipy.integrate import quad
from easypy.tokens import FORMAT1, FORMAT2

from lognormal_surrogates.dists import Lognormal, AlphaMu, Nakagami, InvNakagami, KappaMu, EtaMu
from lognormal_surrogates.exceptions import ParameterError, DomainError
from lognormal_surrogates.utils import integrate_log_domain

from conftest import assert_close


ENVELOPES = [
    Lognormal(0.3, 0.7),
    AlphaMu(2.5, 1.7, 1.3),
    Nakagami(2.2, 1.5),
    InvNakagami(3.5, 2.0),
    KappaMu(2.83, 2.16, 2.66),
    EtaMu(2.04, 4.51, 4.50),
    EtaMu(-0.4, 1.2, 0.8, FORMAT2),
]


def _ids(dist):
    return f"{dist.name}{tuple(v for v in dist.__dict__.values() if isinstance(v, float))}"


class TestEnvelopeSuite:

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    @pytest.mark.parametrize("r", [1e-200, 1e150, 1e200])
    def test_far_tails(self, dist, r):
        """Test densities vanish far outside the bulk instead of turning into nan"""
        assert dist.pdf(r) == 0.0

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_pdf_normalised(self, dist):
        assert abs(integrate_log_domain(dist.pdf, dist.scale) - 1.0) < 1e-8

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_cdf_is_integrated_pdf(self, dist):
        """Test the cdf against direct quadrature of the pdf at points around the scale"""
        for r in (0.5 * dist.scale, dist.scale, 1.7 * dist.scale):
            expected, _ = quad(dist.pdf, 0.0, r, epsabs=1e-13, epsrel=1e-11, limit=200)
            assert abs(dist.cdf(r) - expected) < 1e-7

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_cdf_monotone(self, dist):
        values = dist.cdf(np.geomspace(0.05, 20, 40) * dist.scale)
        assert np.all(np.diff(values) >= -1e-9)
        assert np.all((values >= 0) & (values <= 1))

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_moments(self, dist, k):
        expected = integrate_log_domain(lambda r: r ** k * dist.pdf(r), dist.scale)
        assert_close(dist.moment(k), expected, rel=1e-7)

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_log_statistics(self, dist):
        """Test closed-form log-mean and log-variance against quadrature"""
        assert abs(dist.log_mean() - dist._quadrature_log_mean()) < 1e-7
        assert abs(dist.log_var() - dist._quadrature_log_var()) < 1e-7

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_sampler_mean_power(self, dist, rng):
        """Test the exact sampler reproduces E[R^2] within four standard errors"""
        power = dist.sample(rng, 200_000) ** 2
        se = power.std(ddof=1) / math.sqrt(power.size)
        assert abs(power.mean() - dist.moment(2)) < 4 * se

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_log_density(self, dist):
        y = np.array([-1.0, 0.0, 0.5]) + math.log(dist.scale)
        expected = dist.pdf(np.exp(y)) * np.exp(y)
        assert np.allclose(dist.log_density(y), expected, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("dist", ENVELOPES, ids=_ids)
    def test_nonpositive_radius(self, dist):
        with pytest.raises(DomainError):
            dist.pdf(0.0)
        with pytest.raises(DomainError):
            dist.cdf(np.array([1.0, -1.0]))


class TestFamilyRelationsSuite:

    def test_unit_power_moments(self):
        """Test E[R^2] = r_hat^2 for the generalised families"""
        assert_close(KappaMu(3.83, 4.35, 3.66).moment(2), 3.66 ** 2, rel=1e-12)
        assert_close(EtaMu(3.95, 1.24, 4.62).moment(2), 4.62 ** 2, rel=1e-12)
        assert_close(AlphaMu(4.45, 1.13, 2.98).moment(4.45), 2.98 ** 4.45, rel=1e-12)
        assert_close(InvNakagami(2.5, 3.0).moment(2), 3.0, rel=1e-12)

    def test_kappa_zero_is_nakagami(self):
        r = np.array([0.3, 1.0, 2.5])
        dist, reference = KappaMu(0.0, 1.7, 1.2), Nakagami(1.7, 1.44)
        assert np.allclose(dist.pdf(r), reference.pdf(r), rtol=1e-13)
        assert np.allclose(dist.cdf(r), reference.cdf(r), rtol=1e-13)
        assert dist.log_var() == reference.log_var()

    @pytest.mark.parametrize("eta, fmt", [(0.0, FORMAT2), (1.0, FORMAT1)])
    def test_balanced_eta_mu_is_nakagami(self, eta, fmt):
        """Test eta-mu with equal in-phase and quadrature powers reduces to Nakagami-2mu"""
        r = np.array([0.3, 1.0, 2.5])
        dist, reference = EtaMu(eta, 1.3, 1.1, fmt), Nakagami(2.6, 1.21)
        assert np.allclose(dist.pdf(r), reference.pdf(r), rtol=1e-12)
        assert np.allclose(dist.cdf(r), reference.cdf(r), rtol=1e-12)
        assert abs(dist.log_mean() - reference.log_mean()) < 1e-14

    def test_eta_mu_formats_agree(self):
        """Test format 1 eta and its format 2 counterpart (1 - eta) / (1 + eta) describe one envelope"""
        first = EtaMu(3.0, 1.5, 1.2, FORMAT1)
        second = EtaMu((1 - 3.0) / (1 + 3.0), 1.5, 1.2, FORMAT2)
        r = np.array([0.4, 1.2, 2.0])
        assert np.allclose(first.pdf(r), second.pdf(r), rtol=1e-12)

    def test_nakagami_is_alpha_mu(self):
        r = np.array([0.2, 1.0, 3.0])
        dist = Nakagami(3.1, 2.2)
        assert np.allclose(dist.pdf(r), dist.as_alpha_mu().pdf(r), rtol=1e-13)
        assert abs(dist.log_mean() - dist.as_alpha_mu().log_mean()) < 1e-14

    def test_inverse_nakagami_reciprocal(self):
        dist = InvNakagami(2.5, 3.0)
        r = np.array([0.5, 1.7, 4.0])
        assert np.allclose(dist.cdf(r), 1 - dist.reciprocal().cdf(1 / r), rtol=1e-13)

    @pytest.mark.parametrize("factory", [
        lambda: Lognormal(0.0, 0.0),
        lambda: InvNakagami(1.0, 1.0),
        lambda: Nakagami(-1.0, 1.0),
        lambda: KappaMu(-0.1, 1.0, 1.0),
        lambda: EtaMu(1.0, 1.0, 1.0, FORMAT2),
        lambda: EtaMu(0.0, 1.0, 1.0, FORMAT1),
        lambda: AlphaMu(2.0, 1.0, 0.0),
    ])
    def test_invalid_parameters(self, factory):
        with pytest.raises(ParameterError):
            factory()

    def test_inverse_nakagami_moment_range(self):
        with pytest.raises(ParameterError):
            InvNakagami(1.5, 1.0).moment(3.0)
