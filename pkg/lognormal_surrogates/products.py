"""
Product surrogates for the Lognormal envelope.

X = prod W_i with W_i ~ Nakagami(m_i, Omega_i), Y = prod T_i with T_i ~ InvNakagami(m_i, Omega_i),
and the Bernoulli(p) mixture Z of X and Y. Densities and distribution functions
are Meijer-G functions evaluated by specfun; log-statistics are closed form.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .dists import Nakagami, InvNakagami
from .logging import logger
from .specfun import ContourConfig, MeijerGSpec, meijer_g, log_pochhammer
from .utils import require, elementwise, evaluation_context


CLAMP_REPORT_THRESHOLD = 1e-8
LN2 = math.log(2)


def _clamp_probability(value: float, what: str, r: float) -> float:
    clamped = min(max(value, 0.0), 1.0)
    if abs(clamped - value) > CLAMP_REPORT_THRESHOLD:
        logger.warning(f"{what} at r={r:g} evaluated to {value:.3e}, clamped to {clamped:g}")
    return clamped


class _Product:
    factors: tuple
    name = "product"

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def m_list(self) -> Tuple[float, ...]:
        return tuple(f.m for f in self.factors)

    @property
    def log_omega(self) -> float:
        return float(sum(math.log(f.omega) for f in self.factors))

    @property
    def omega(self) -> float:
        return math.exp(self.log_omega)

    @property
    def scale(self) -> float:
        return math.exp(self.log_mean())

    @property
    def log_gamma_m(self) -> float:
        return float(sum(special.gammaln(m) for m in self.m_list))

    def log_var(self) -> float:
        return float(sum(special.polygamma(1, m) for m in self.m_list)) / 4

    def log_stats(self):
        return self.log_mean(), self.log_var()

    def sample(self, rng, size=None):
        out = np.ones(size) if size is not None else 1.0
        for factor in self.factors:
            out = out * factor.sample(rng, size)
        return out

    @property
    def is_iid(self) -> bool:
        return len(set((f.m, f.omega) for f in self.factors)) == 1

    def __str__(self):
        if self.is_iid:
            return f"{self.name}(N={self.n}, m={self.factors[0].m:.6g}, Omega={self.omega:.6g})"
        return f"{self.name}({', '.join(f'({f.m:.4g}, {f.omega:.4g})' for f in self.factors)})"


@dataclass(frozen=True)
class NakagamiProductParams(_Product):
    factors: Tuple[Nakagami, ...]
    name = "nakagami-product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        require(self.n >= 1, "N", self.n, "needs at least one factor")

    @classmethod
    def iid(cls, m: float, omega: float, n: int) -> "NakagamiProductParams":
        require(n >= 1, "N", n, "needs at least one factor")
        return cls(factors=(Nakagami(m=m, omega=omega ** (1.0 / n)),) * n)

    @classmethod
    def iid_log(cls, m: float, log_omega: float, n: int) -> "NakagamiProductParams":
        """Same as iid(), taking log(Omega_X) so very large or small products stay representable"""
        require(n >= 1, "N", n, "needs at least one factor")
        return cls(factors=(Nakagami(m=m, omega=math.exp(log_omega / n)),) * n)

    @property
    def log_theta(self) -> float:
        """log of prod(m_i) / Omega_X, the scale of the Meijer-G argument"""
        return float(sum(math.log(m) for m in self.m_list)) - self.log_omega

    @elementwise
    def pdf(self, r: float, cfg: Optional[ContourConfig] = None) -> float:
        require(r > 0, "r", r, "must be positive")
        log_x = self.log_theta + 2 * math.log(r)
        with evaluation_context(f"pdf of {self}", r):
            return meijer_g(MeijerGSpec(self.n, 0, (), self.m_list, log_x=log_x), cfg,
                            log_prefactor=LN2 - math.log(r) - self.log_gamma_m)

    @elementwise
    def cdf(self, r: float, cfg: Optional[ContourConfig] = None) -> float:
        require(r > 0, "r", r, "must be positive")
        log_x = self.log_theta + 2 * math.log(r)
        with evaluation_context(f"cdf of {self}", r):
            value = meijer_g(MeijerGSpec(self.n, 1, (1.0,), self.m_list + (0.0,), log_x=log_x), cfg,
                             log_prefactor=-self.log_gamma_m)
        return _clamp_probability(value, f"cdf of {self}", r)

    def moment(self, k: float) -> float:
        require(k > -2 * min(self.m_list), "k", k, "requires k > -2 min(m_i)")
        return math.exp(sum(log_pochhammer(m, k / 2) for m in self.m_list) - k / 2 * self.log_theta)

    def log_mean(self) -> float:
        return 0.5 * (self.log_omega - sum(math.log(m) - special.psi(m) for m in self.m_list))


@dataclass(frozen=True)
class InvNakagamiProductParams(_Product):
    factors: Tuple[InvNakagami, ...]
    name = "inv-nakagami-product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        require(self.n >= 1, "N", self.n, "needs at least one factor")

    @classmethod
    def iid(cls, m: float, omega: float, n: int) -> "InvNakagamiProductParams":
        require(n >= 1, "N", n, "needs at least one factor")
        return cls(factors=(InvNakagami(m=m, omega=omega ** (1.0 / n)),) * n)

    @classmethod
    def iid_log(cls, m: float, log_omega: float, n: int) -> "InvNakagamiProductParams":
        require(n >= 1, "N", n, "needs at least one factor")
        return cls(factors=(InvNakagami(m=m, omega=math.exp(log_omega / n)),) * n)

    @property
    def log_beta(self) -> float:
        """log of Omega_Y prod(m_i - 1)"""
        return float(sum(math.log(f.theta) for f in self.factors))

    @elementwise
    def pdf(self, r: float, cfg: Optional[ContourConfig] = None) -> float:
        require(r > 0, "r", r, "must be positive")
        log_x = 2 * math.log(r) - self.log_beta
        a_params = tuple(0.5 - m for m in self.m_list)
        with evaluation_context(f"pdf of {self}", r):
            return meijer_g(MeijerGSpec(0, self.n, a_params, (), log_x=log_x), cfg,
                            log_prefactor=math.log(2) - 0.5 * self.log_beta - self.log_gamma_m)

    @elementwise
    def cdf(self, r: float, cfg: Optional[ContourConfig] = None) -> float:
        require(r > 0, "r", r, "must be positive")
        log_x = 2 * math.log(r) - self.log_beta
        a_params = tuple(1.0 - m for m in self.m_list) + (1.0,)
        with evaluation_context(f"cdf of {self}", r):
            value = meijer_g(MeijerGSpec(0, self.n + 1, a_params, (0.0,), log_x=log_x), cfg,
                             log_prefactor=-self.log_gamma_m)
        return _clamp_probability(value, f"cdf of {self}", r)

    def moment(self, k: float) -> float:
        require(k < 2 * min(self.m_list), "k", k, "requires k < 2 min(m_i)")
        return math.exp(sum(log_pochhammer(m, -k / 2) for m in self.m_list) + k / 2 * self.log_beta)

    def log_mean(self) -> float:
        return 0.5 * (self.log_beta - sum(special.psi(m) for m in self.m_list))


@dataclass(frozen=True)
class MixtureParams:
    """Z = X with probability p, Y otherwise"""

    nak: NakagamiProductParams
    inv: InvNakagamiProductParams
    p: float = 0.5
    name = "mixture"

    def __post_init__(self):
        require(0 <= self.p <= 1, "p", self.p, "must lie in [0, 1]")

    def combine(self, nak_value, inv_value):
        return metric_mixture(nak_value, inv_value, self.p)

    def pdf(self, r, cfg: Optional[ContourConfig] = None):
        return self.combine(self.nak.pdf(r, cfg) if self.p else 0.0, self.inv.pdf(r, cfg) if self.p < 1 else 0.0)

    def cdf(self, r, cfg: Optional[ContourConfig] = None):
        return self.combine(self.nak.cdf(r, cfg) if self.p else 0.0, self.inv.cdf(r, cfg) if self.p < 1 else 0.0)

    def moment(self, k: float) -> float:
        return self.combine(self.nak.moment(k), self.inv.moment(k))

    def log_mean(self) -> float:
        return self.combine(self.nak.log_mean(), self.inv.log_mean())

    def log_var(self) -> float:
        # law of total variance over the Bernoulli selector
        spread = self.p * (1 - self.p) * (self.nak.log_mean() - self.inv.log_mean()) ** 2
        return self.combine(self.nak.log_var(), self.inv.log_var()) + spread

    def log_stats(self):
        return self.log_mean(), self.log_var()

    def sample(self, rng, size=None):
        pick = rng.random(size) < self.p
        return np.where(pick, self.nak.sample(rng, size), self.inv.sample(rng, size))

    def __str__(self):
        return f"mixture(p={self.p:g}, {self.nak}, {self.inv})"


def metric_mixture(nak_value, inv_value, p: float):
    """p * nak_value + (1 - p) * inv_value; any linear statistic of the mixture combines this way"""
    require(0 <= p <= 1, "p", p, "must lie in [0, 1]")
    return p * nak_value + (1 - p) * inv_value


# Functional aliases, one per named operation

def pdf_nak_product(params: NakagamiProductParams, r, cfg=None):
    return params.pdf(r, cfg)


def cdf_nak_product(params: NakagamiProductParams, r, cfg=None):
    return params.cdf(r, cfg)


def log_stats_nak_product(params: NakagamiProductParams):
    return params.log_stats()


def pdf_inv_product(params: InvNakagamiProductParams, r, cfg=None):
    return params.pdf(r, cfg)


def cdf_inv_product(params: InvNakagamiProductParams, r, cfg=None):
    return params.cdf(r, cfg)


def log_stats_inv_product(params: InvNakagamiProductParams):
    return params.log_stats()


def pdf_mixture(params: MixtureParams, r, cfg=None):
    return params.pdf(r, cfg)


def cdf_mixture(params: MixtureParams, r, cfg=None):
    return params.cdf(r, cfg)


def sample_nak_product(params: NakagamiProductParams, rng, size=None):
    return params.sample(rng, size)


def sample_inv_product(params: InvNakagamiProductParams, rng, size=None):
    return params.sample(rng, size)


def sample_mixture(params: MixtureParams, rng, size=None):
    return params.sample(rng, size)
