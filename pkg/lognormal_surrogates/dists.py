"""
Base envelope distributions: Lognormal, alpha-mu, kappa-mu, eta-mu, Nakagami-m
and Inverse Nakagami-m.

Every family is a frozen dataclass exposing the same surface:

    pdf(r), logpdf(r), cdf(r)         vectorised over r > 0
    moment(k)                         E[R^k] for real k in the family's range
    log_mean(), log_var()             mean and variance of log R
    sample(rng, size)                 exact sampler driven by a caller-owned numpy Generator
    log_density(y)                    density of log R at y, used by the FFT oracle
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats
from scipy.integrate import quad

from easypy.tokens import FORMAT1, FORMAT2

from .exceptions import DomainError
from .logging import capture_integration_warnings
from .specfun import kummer_1f1, kummer_1f1_da_at_zero, gauss_2f1, log_bessel_i, log_bessel_ive, log_pochhammer
from .utils import require, integrate_log_domain


ETA_MU_FORMATS = {FORMAT1, FORMAT2}
LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _radius(r, family):
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise DomainError(func=f"{family}.pdf", arg="r", value=float(r[~(r > 0)].flat[0]), reason="requires r > 0")
    return r


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class _Envelope:
    """Shared behaviour; subclasses provide logpdf, cdf, moment, log_mean, sample and `scale`"""

    name = "envelope"

    def pdf(self, r):
        return _out(np.exp(self.logpdf(r)))

    def log_density(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            r = np.exp(y)
        out = np.zeros(y.shape)
        ok = (r > 0) & np.isfinite(r)
        out[ok] = np.exp(np.asarray(self.logpdf(r[ok])) + y[ok])
        return _out(out)

    def log_moment(self, k):
        return math.log(self.moment(k))

    def log_stats(self):
        return self.log_mean(), self.log_var()

    def _quadrature_log_var(self):
        nu = self.log_mean()
        return integrate_log_domain(lambda r: (math.log(r) - nu) ** 2 * self.pdf(r), self.scale,
                                    what=f"{self.name} log-variance")

    def _quadrature_log_mean(self):
        return integrate_log_domain(lambda r: math.log(r) * self.pdf(r), self.scale,
                                    what=f"{self.name} log-mean")

    def _quadrature_cdf(self, r):
        r = _radius(r, self.name)

        def one(x):
            with capture_integration_warnings(f"{self.name} cdf"):
                lower, _ = quad(lambda y: float(self.log_density(y)), -np.inf, math.log(x), epsabs=1e-14, limit=200)
            return min(max(lower, 0.0), 1.0)

        return _out(np.vectorize(one, otypes=[float])(r))


@dataclass(frozen=True)
class Lognormal(_Envelope):
    nu: float
    sigma: float
    name = "lognormal"

    def __post_init__(self):
        require(self.sigma > 0, "sigma", self.sigma, "must be positive")
        require(math.isfinite(self.nu), "nu", self.nu, "must be finite")

    @property
    def scale(self):
        return math.exp(self.nu)

    def logpdf(self, r):
        r = _radius(r, self.name)
        z = (np.log(r) - self.nu) / self.sigma
        return _out(-0.5 * z ** 2 - np.log(r) - math.log(self.sigma) - LOG_SQRT_2PI)

    def cdf(self, r):
        r = _radius(r, self.name)
        return _out(special.ndtr((np.log(r) - self.nu) / self.sigma))

    def moment(self, k):
        return math.exp(k * self.nu + 0.5 * k ** 2 * self.sigma ** 2)

    def log_mean(self):
        return self.nu

    def log_var(self):
        return self.sigma ** 2

    def sample(self, rng, size=None):
        return np.exp(self.nu + self.sigma * rng.standard_normal(size))


@dataclass(frozen=True)
class AlphaMu(_Envelope):
    alpha: float
    mu: float
    r_hat: float
    name = "alpha-mu"

    def __post_init__(self):
        for field in ("alpha", "mu", "r_hat"):
            require(getattr(self, field) > 0, field, getattr(self, field), "must be positive")

    @property
    def scale(self):
        return self.r_hat

    def logpdf(self, r):
        r = _radius(r, self.name)
        a, mu = self.alpha, self.mu
        rho = r / self.r_hat
        return _out(math.log(a) + mu * math.log(mu) - special.gammaln(mu) - math.log(self.r_hat)
                    + (a * mu - 1) * np.log(rho) - mu * rho ** a)

    def cdf(self, r):
        r = _radius(r, self.name)
        return _out(special.gammainc(self.mu, self.mu * (r / self.r_hat) ** self.alpha))

    def moment(self, k):
        require(k > -self.alpha * self.mu, "k", k, f"requires k > -alpha*mu = {-self.alpha * self.mu}")
        a, mu = self.alpha, self.mu
        return math.exp(k * math.log(self.r_hat) + log_pochhammer(mu, k / a) - k / a * math.log(mu))

    def log_mean(self):
        return math.log(self.r_hat) + (special.psi(self.mu) - math.log(self.mu)) / self.alpha

    def log_var(self):
        return special.polygamma(1, self.mu) / self.alpha ** 2

    def sample(self, rng, size=None):
        g = rng.gamma(self.mu, 1.0, size)
        return self.r_hat * (g / self.mu) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class Nakagami(_Envelope):
    m: float
    omega: float
    name = "nakagami"

    def __post_init__(self):
        require(self.m > 0, "m", self.m, "must be positive")
        require(self.omega > 0, "omega", self.omega, "must be positive")

    @property
    def scale(self):
        return math.sqrt(self.omega)

    def as_alpha_mu(self) -> AlphaMu:
        return AlphaMu(alpha=2.0, mu=self.m, r_hat=math.sqrt(self.omega))

    def logpdf(self, r):
        r = _radius(r, self.name)
        m = self.m
        return _out(math.log(2) + m * math.log(m / self.omega) - special.gammaln(m)
                    + (2 * m - 1) * np.log(r) - m * r ** 2 / self.omega)

    def cdf(self, r):
        r = _radius(r, self.name)
        return _out(special.gammainc(self.m, self.m * r ** 2 / self.omega))

    def moment(self, k):
        require(k > -2 * self.m, "k", k, f"requires k > -2m = {-2 * self.m}")
        return math.exp(log_pochhammer(self.m, k / 2) + k / 2 * math.log(self.omega / self.m))

    def log_mean(self):
        return 0.5 * (special.psi(self.m) - math.log(self.m / self.omega))

    def log_var(self):
        return special.polygamma(1, self.m) / 4

    def sample(self, rng, size=None):
        return np.sqrt(rng.gamma(self.m, self.omega / self.m, size))


@dataclass(frozen=True)
class InvNakagami(_Envelope):
    """T = 1/W with W ~ Nakagami(m, m / (omega (m - 1))), so that E[T^2] = omega"""

    m: float
    omega: float
    name = "inv-nakagami"

    def __post_init__(self):
        require(self.m > 1, "m", self.m, "must exceed 1 for a finite mean power")
        require(self.omega > 0, "omega", self.omega, "must be positive")

    @property
    def theta(self):
        return (self.m - 1) * self.omega

    @property
    def scale(self):
        return math.sqrt(self.omega)

    def reciprocal(self) -> Nakagami:
        return Nakagami(m=self.m, omega=self.m / self.theta)

    def logpdf(self, r):
        r = _radius(r, self.name)
        m, theta = self.m, self.theta
        return _out(math.log(2) + m * math.log(theta) - special.gammaln(m)
                    - (2 * m + 1) * np.log(r) - theta / r ** 2)

    def cdf(self, r):
        r = _radius(r, self.name)
        return _out(special.gammaincc(self.m, self.theta / r ** 2))

    def moment(self, k):
        require(k < 2 * self.m, "k", k, f"requires k < 2m = {2 * self.m}")
        return math.exp(log_pochhammer(self.m, -k / 2) + k / 2 * math.log(self.theta))

    def log_mean(self):
        return 0.5 * (math.log(self.theta) - special.psi(self.m))

    def log_var(self):
        return special.polygamma(1, self.m) / 4

    def sample(self, rng, size=None):
        return 1.0 / np.sqrt(rng.gamma(self.m, 1.0 / self.theta, size))


@dataclass(frozen=True)
class KappaMu(_Envelope):
    kappa: float
    mu: float
    r_hat: float
    name = "kappa-mu"

    def __post_init__(self):
        require(self.kappa >= 0, "kappa", self.kappa, "must be non-negative")
        require(self.mu > 0, "mu", self.mu, "must be positive")
        require(self.r_hat > 0, "r_hat", self.r_hat, "must be positive")

    @property
    def scale(self):
        return self.r_hat

    def as_nakagami(self) -> Nakagami:
        return Nakagami(m=self.mu, omega=self.r_hat ** 2)

    def logpdf(self, r):
        if self.kappa == 0:
            return self.as_nakagami().logpdf(r)
        r = _radius(r, self.name)
        k, mu = self.kappa, self.mu
        rho = r / self.r_hat
        bessel = log_bessel_i(mu - 1, 2 * mu * math.sqrt(k * (1 + k)) * rho)
        return _out(math.log(2 * mu) + (mu + 1) / 2 * math.log1p(k) - (mu - 1) / 2 * math.log(k) - mu * k
                    - math.log(self.r_hat) + mu * np.log(rho) - mu * (1 + k) * rho ** 2 + bessel)

    def cdf(self, r):
        if self.kappa == 0:
            return self.as_nakagami().cdf(r)
        r = _radius(r, self.name)
        # 2 mu (1 + kappa) R^2 / r_hat^2 is noncentral chi-square with 2 mu degrees of freedom
        x = 2 * self.mu * (1 + self.kappa) * (r / self.r_hat) ** 2
        return _out(stats.ncx2.cdf(x, 2 * self.mu, 2 * self.kappa * self.mu))

    def moment(self, k):
        return math.exp(self.log_moment(k))

    def log_moment(self, k):
        require(k > -2 * self.mu, "k", k, f"requires k > -2mu = {-2 * self.mu}")
        mu, kap = self.mu, self.kappa
        log_part = k * math.log(self.r_hat) + log_pochhammer(mu, k / 2) - k / 2 * math.log((1 + kap) * mu)
        return log_part + math.log(kummer_1f1(-k / 2, mu, -kap * mu))

    def log_mean(self):
        mu, kap = self.mu, self.kappa
        return (math.log(self.r_hat) - 0.5 * math.log((1 + kap) * mu) + 0.5 * special.psi(mu)
                - 0.5 * kummer_1f1_da_at_zero(mu, -kap * mu))

    def log_var(self):
        if self.kappa == 0:
            return self.as_nakagami().log_var()
        return self._quadrature_log_var()

    def sample(self, rng, size=None):
        poisson = rng.poisson(self.kappa * self.mu, size)
        g = rng.gamma(self.mu + poisson, 1.0)
        return np.sqrt(g * self.r_hat ** 2 / (self.mu * (1 + self.kappa)))


@dataclass(frozen=True)
class EtaMu(_Envelope):
    """
    eta-mu envelope. `format` is FORMAT1 (eta > 0 is the in-phase/quadrature power
    ratio) or FORMAT2 (-1 < eta < 1 is their normalised difference).
    """

    eta: float
    mu: float
    r_hat: float
    format: object = FORMAT1
    name = "eta-mu"

    def __post_init__(self):
        require(self.format in ETA_MU_FORMATS, "format", self.format, "use FORMAT1 or FORMAT2")
        if self.format == FORMAT1:
            require(self.eta > 0, "eta", self.eta, "format 1 requires eta > 0")
        else:
            require(-1 < self.eta < 1, "eta", self.eta, "format 2 requires -1 < eta < 1")
        require(self.mu > 0, "mu", self.mu, "must be positive")
        require(self.r_hat > 0, "r_hat", self.r_hat, "must be positive")

    @property
    def h(self):
        if self.format == FORMAT1:
            return (2 + 1 / self.eta + self.eta) / 4
        return 1 / (1 - self.eta ** 2)

    @property
    def big_h(self):
        if self.format == FORMAT1:
            return (1 / self.eta - self.eta) / 4
        return self.eta / (1 - self.eta ** 2)

    @property
    def scale(self):
        return self.r_hat

    def as_nakagami(self) -> Nakagami:
        return Nakagami(m=2 * self.mu, omega=self.r_hat ** 2)

    def logpdf(self, r):
        big_h = abs(self.big_h)
        if big_h == 0:
            return self.as_nakagami().logpdf(r)
        r = _radius(r, self.name)
        mu, h = self.mu, self.h
        rho = r / self.r_hat
        bessel = log_bessel_ive(mu - 0.5, 2 * mu * big_h * rho ** 2)
        return _out(math.log(4) + 0.5 * math.log(math.pi) + (mu + 0.5) * math.log(mu) + mu * math.log(h)
                    - special.gammaln(mu) - (mu - 0.5) * math.log(big_h) - math.log(self.r_hat)
                    + 2 * mu * np.log(rho) - 2 * mu * (h - big_h) * rho ** 2 + bessel)

    def cdf(self, r):
        if self.big_h == 0:
            return self.as_nakagami().cdf(r)
        return self._quadrature_cdf(r)

    def moment(self, k):
        return math.exp(self.log_moment(k))

    def log_moment(self, k):
        require(k > -4 * self.mu, "k", k, f"requires k > -4mu = {-4 * self.mu}")
        mu = self.mu
        ratio = (self.big_h / self.h) ** 2
        log_part = k * math.log(self.r_hat) + log_pochhammer(2 * mu, k / 2) - k / 2 * math.log(2 * mu)
        return log_part + math.log(gauss_2f1(-k / 4, (2 - k) / 4, mu + 0.5, ratio))

    def log_mean(self):
        if self.big_h == 0:
            return self.as_nakagami().log_mean()
        return self._quadrature_log_mean()

    def log_var(self):
        if self.big_h == 0:
            return self.as_nakagami().log_var()
        return self._quadrature_log_var()

    def sample(self, rng, size=None):
        h, big_h, s2 = self.h, self.big_h, self.r_hat ** 2
        power = rng.gamma(self.mu, s2 / (2 * self.mu * (h + big_h)), size) \
            + rng.gamma(self.mu, s2 / (2 * self.mu * (h - big_h)), size)
        return np.sqrt(power)
