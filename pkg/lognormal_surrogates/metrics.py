"""
Link metrics and composite fading under the product surrogates.

All closed forms are Meijer-G / Fox-H functions whose Mellin transforms are the
product moments times the Mellin transform of the averaged kernel (cos, sin,
Gamma(b, a gamma), log(1 + gamma), or the conditional alpha-mu density).
Prefactors are folded in log-space and exponentiated once.

The instantaneous SNR is gamma = gamma_bar * r^2 / E[R^2], with E[R^2] the
surrogate's mean power, so every metric depends on (m_i, gamma_bar) only.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import special

from .configuration import CONF
from .dists import AlphaMu
from .exceptions import InvalidSurrogate
from .mapping import ForwardSolution
from .products import NakagamiProductParams, InvNakagamiProductParams, MixtureParams, metric_mixture
from .specfun import ContourConfig, MeijerGSpec, FoxHSpec, meijer_g, fox_h, log_pochhammer
from .utils import require, elementwise, evaluation_context


SPECIAL_CASE_THRESHOLD = 1e-12
LOG_SQRT_PI = 0.5 * math.log(math.pi)
LN2 = math.log(2)


@dataclass(frozen=True)
class LinkParams:
    gamma_bar: float
    a: float = 1.0
    b: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self):
        for name in ("gamma_bar", "a", "b", "bandwidth"):
            require(getattr(self, name) > 0, name, getattr(self, name), "must be positive")


def instantaneous_snr(r, mean_power: float, gamma_bar: float):
    return gamma_bar * np.square(r) / mean_power


def conditional_ber(gamma, link: LinkParams):
    """Gamma(b, a gamma) / (2 Gamma(b)), covering coherent and non-coherent binary schemes"""
    return 0.5 * special.gammaincc(link.b, link.a * np.asarray(gamma, dtype=float))


def conditional_capacity(gamma, link: LinkParams):
    return link.bandwidth * np.log2(1.0 + np.asarray(gamma, dtype=float))


def _log_prod_m(params) -> float:
    return float(sum(math.log(m) for m in params.m_list))


def _log_prod_m_minus_1(params) -> float:
    return float(sum(math.log(m - 1) for m in params.m_list))


# ----------------------------------------------------------------------------------------------------------------------
# Characteristic function
# ----------------------------------------------------------------------------------------------------------------------


def _complex_elementwise(func):
    def wrapper(params, omega, cfg=None):
        if np.ndim(omega) == 0:
            return func(params, float(omega), cfg)
        return np.vectorize(lambda w: func(params, w, cfg), otypes=[complex])(np.asarray(omega, dtype=float))
    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@_complex_elementwise
def cf_nak_product(params: NakagamiProductParams, omega: float, cfg: Optional[ContourConfig] = None) -> complex:
    """E[exp(j omega X)]"""
    if omega == 0:
        return complex(1.0, 0.0)
    m = params.m_list
    log_x = params.log_theta + 2 * (LN2 - math.log(abs(omega)))
    log_pre = LOG_SQRT_PI - params.log_gamma_m
    with evaluation_context(f"cf of {params}", omega):
        real = meijer_g(MeijerGSpec(params.n, 1, (1.0, 0.5), m, log_x=log_x), cfg, log_pre)
        imag = meijer_g(MeijerGSpec(params.n, 1, (0.5, 1.0), m, log_x=log_x), cfg, log_pre)
    return complex(real, imag if omega > 0 else -imag)


@_complex_elementwise
def cf_inv_product(params: InvNakagamiProductParams, omega: float, cfg: Optional[ContourConfig] = None) -> complex:
    """E[exp(j omega Y)]"""
    if omega == 0:
        return complex(1.0, 0.0)
    m = params.m_list
    log_x = 2 * (math.log(abs(omega)) - LN2) + params.log_beta
    log_pre = LOG_SQRT_PI - params.log_gamma_m
    with evaluation_context(f"cf of {params}", omega):
        real = meijer_g(MeijerGSpec(params.n + 1, 0, (), (0.0,) + m + (0.5,), log_x=log_x), cfg, log_pre)
        imag = meijer_g(MeijerGSpec(params.n + 1, 0, (), (0.5,) + m + (0.0,), log_x=log_x), cfg, log_pre)
    return complex(real, imag if omega > 0 else -imag)


# ----------------------------------------------------------------------------------------------------------------------
# Bit error rate and capacity
# ----------------------------------------------------------------------------------------------------------------------


def ber_nak_product(params: NakagamiProductParams, link: LinkParams, cfg: Optional[ContourConfig] = None) -> float:
    log_x = _log_prod_m(params) - math.log(link.a * link.gamma_bar)
    log_pre = -LN2 - special.gammaln(link.b) - params.log_gamma_m
    with evaluation_context(f"ber of {params}", link.gamma_bar):
        spec = MeijerGSpec(params.n, 2, (1.0, 1.0 - link.b), params.m_list + (0.0,), log_x=log_x)
        return meijer_g(spec, cfg, log_pre)


def ber_inv_product(params: InvNakagamiProductParams, link: LinkParams, cfg: Optional[ContourConfig] = None) -> float:
    log_x = math.log(link.a * link.gamma_bar) + _log_prod_m_minus_1(params)
    log_pre = -LN2 - special.gammaln(link.b) - params.log_gamma_m
    with evaluation_context(f"ber of {params}", link.gamma_bar):
        return meijer_g(MeijerGSpec(params.n + 2, 0, (1.0,), (0.0, link.b) + params.m_list, log_x=log_x), cfg, log_pre)


def capacity_nak_product(params: NakagamiProductParams, link: LinkParams,
                         cfg: Optional[ContourConfig] = None) -> float:
    """Ergodic capacity in bits/s"""
    log_x = _log_prod_m(params) - math.log(link.gamma_bar)
    log_pre = math.log(link.bandwidth / LN2) - params.log_gamma_m
    with evaluation_context(f"capacity of {params}", link.gamma_bar):
        return meijer_g(MeijerGSpec(params.n + 2, 1, (0.0, 1.0), (0.0, 0.0) + params.m_list, log_x=log_x), cfg, log_pre)


def capacity_inv_product(params: InvNakagamiProductParams, link: LinkParams,
                         cfg: Optional[ContourConfig] = None) -> float:
    log_x = math.log(link.gamma_bar) + _log_prod_m_minus_1(params)
    log_pre = math.log(link.bandwidth / LN2) - params.log_gamma_m
    with evaluation_context(f"capacity of {params}", link.gamma_bar):
        spec = MeijerGSpec(params.n + 1, 2, (1.0, 1.0), (1.0,) + params.m_list + (0.0,), log_x=log_x)
        return meijer_g(spec, cfg, log_pre)


# ----------------------------------------------------------------------------------------------------------------------
# Model dispatch
# ----------------------------------------------------------------------------------------------------------------------


def _dispatch(model, nak_func, inv_func, *args):
    if isinstance(model, NakagamiProductParams):
        return nak_func(model, *args)
    if isinstance(model, InvNakagamiProductParams):
        return inv_func(model, *args)
    if isinstance(model, MixtureParams):
        nak = nak_func(model.nak, *args) if model.p > 0 else 0.0
        inv = inv_func(model.inv, *args) if model.p < 1 else 0.0
        return metric_mixture(nak, inv, model.p)
    raise TypeError(f"not a surrogate model: {model!r}")


def characteristic_function(model, omega, cfg: Optional[ContourConfig] = None):
    return _dispatch(model, cf_nak_product, cf_inv_product, omega, cfg)


def bit_error_rate(model, link: LinkParams, cfg: Optional[ContourConfig] = None) -> float:
    return _dispatch(model, ber_nak_product, ber_inv_product, link, cfg)


def capacity(model, link: LinkParams, cfg: Optional[ContourConfig] = None) -> float:
    return _dispatch(model, capacity_nak_product, capacity_inv_product, link, cfg)


# ----------------------------------------------------------------------------------------------------------------------
# Composite alpha-mu / surrogate-shadowed fading
# ----------------------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeParams:
    """
    R | delta ~ alpha-mu with E[R^2 | delta] = omega_r * delta, where delta follows
    the shadow surrogate. `special_cases=False` forces the general Fox-H path.
    """

    alpha: float
    mu: float
    shadow: Union[ForwardSolution, NakagamiProductParams, InvNakagamiProductParams]
    omega_r: float = 1.0
    special_cases: bool = True
    residual_tolerance: float = field(default_factory=lambda: CONF.solver_tolerance)

    def __post_init__(self):
        for name in ("alpha", "mu", "omega_r"):
            require(getattr(self, name) > 0, name, getattr(self, name), "must be positive")
        if isinstance(self.shadow, ForwardSolution):
            residuals = self.shadow.residuals
            if max(map(abs, residuals)) > self.residual_tolerance:
                raise InvalidSurrogate(residuals=residuals, tolerance=self.residual_tolerance)

    @property
    def product(self):
        if isinstance(self.shadow, ForwardSolution):
            return self.shadow.to_product()
        return self.shadow

    @property
    def log_pochhammer_2_alpha(self) -> float:
        return float(log_pochhammer(self.mu, 2 / self.alpha))

    @property
    def path(self) -> str:
        if self.special_cases and abs(self.alpha - 4) < SPECIAL_CASE_THRESHOLD:
            return "alpha4"
        if self.special_cases and abs(self.alpha - 2) < SPECIAL_CASE_THRESHOLD:
            return "alpha2"
        return "general"

    def with_general_path(self) -> "CompositeParams":
        return CompositeParams(self.alpha, self.mu, self.shadow, self.omega_r, special_cases=False,
                               residual_tolerance=self.residual_tolerance)

    def conditional(self, delta: float) -> AlphaMu:
        return conditional_multipath(self.alpha, self.mu, self.omega_r, delta)


def conditional_multipath(alpha: float, mu: float, omega_r: float, delta: float) -> AlphaMu:
    """R given the shadow value delta: alpha-mu with E[R^2 | delta] = omega_r * delta"""
    log_r_hat = 0.5 * (math.log(delta) + math.log(omega_r) - float(log_pochhammer(mu, 2 / alpha))) \
        + math.log(mu) / alpha
    return AlphaMu(alpha=alpha, mu=mu, r_hat=math.exp(log_r_hat))


def _composite_argument_log(params: CompositeParams, r: float) -> float:
    product = params.product
    base = 4 * math.log(r) + 2 * params.log_pochhammer_2_alpha - 2 * math.log(params.omega_r)
    if isinstance(product, NakagamiProductParams):
        return base + product.log_theta
    return base - product.log_beta


def _duplication_params(mu):
    return mu / 2, (mu + 1) / 2


def _composite_nak(params: CompositeParams, r: float, cdf: bool, cfg) -> float:
    product = params.product
    m = product.m_list
    n = product.n
    log_z = _composite_argument_log(params, r)
    log_norm = -product.log_gamma_m - special.gammaln(params.mu)
    path = params.path

    if path == "alpha2":
        log_x = log_z - 2 * LN2
        b_extra = _duplication_params(params.mu)
        log_dup = (params.mu - 1) * LN2 - LOG_SQRT_PI
        if cdf:
            spec = MeijerGSpec(n + 2, 1, (1.0,), m + b_extra + (0.0,), log_x=log_x)
            return meijer_g(spec, cfg, log_norm + log_dup)
        spec = MeijerGSpec(n + 2, 0, (), m + b_extra, log_x=log_x)
        return meijer_g(spec, cfg, 2 * LN2 - math.log(r) + log_norm + log_dup)

    log_x = log_z
    if path == "alpha4":
        if cdf:
            return meijer_g(MeijerGSpec(n + 1, 1, (1.0,), m + (params.mu, 0.0), log_x=log_x), cfg, log_norm)
        return meijer_g(MeijerGSpec(n + 1, 0, (), m + (params.mu,), log_x=log_x), cfg, 2 * LN2 - math.log(r) + log_norm)

    b = tuple((v, 1.0) for v in m) + ((params.mu, 4 / params.alpha),)
    if cdf:
        return fox_h(FoxHSpec(n + 1, 1, ((1.0, 1.0),), b + ((0.0, 1.0),), log_x=log_x), cfg, log_norm)
    return fox_h(FoxHSpec(n + 1, 0, (), b, log_x=log_x), cfg, 2 * LN2 - math.log(r) + log_norm)


def _composite_inv(params: CompositeParams, r: float, cdf: bool, cfg) -> float:
    product = params.product
    a = tuple(1.0 - v for v in product.m_list)
    n = product.n
    log_z = _composite_argument_log(params, r)
    log_norm = -product.log_gamma_m - special.gammaln(params.mu)
    path = params.path

    if path == "alpha2":
        log_x = log_z - 2 * LN2
        b_dup = _duplication_params(params.mu)
        log_dup = (params.mu - 1) * LN2 - LOG_SQRT_PI
        if cdf:
            return meijer_g(MeijerGSpec(2, n + 1, a + (1.0,), b_dup + (0.0,), log_x=log_x), cfg, log_norm + log_dup)
        return meijer_g(MeijerGSpec(2, n, a, b_dup, log_x=log_x), cfg, 2 * LN2 - math.log(r) + log_norm + log_dup)

    log_x = log_z
    if path == "alpha4":
        if cdf:
            return meijer_g(MeijerGSpec(1, n + 1, a + (1.0,), (params.mu, 0.0), log_x=log_x), cfg, log_norm)
        return meijer_g(MeijerGSpec(1, n, a, (params.mu,), log_x=log_x), cfg, 2 * LN2 - math.log(r) + log_norm)

    a_pairs = tuple((v, 1.0) for v in a)
    b_first = ((params.mu, 4 / params.alpha),)
    if cdf:
        return fox_h(FoxHSpec(1, n + 1, a_pairs + ((1.0, 1.0),), b_first + ((0.0, 1.0),), log_x=log_x), cfg, log_norm)
    return fox_h(FoxHSpec(1, n, a_pairs, b_first, log_x=log_x), cfg, 2 * LN2 - math.log(r) + log_norm)


def _composite(params: CompositeParams, r: float, cdf: bool, cfg) -> float:
    require(r > 0, "r", r, "must be positive")
    what = f"composite {'cdf' if cdf else 'pdf'} ({params.path}, {params.product})"
    with evaluation_context(what, r):
        if isinstance(params.product, NakagamiProductParams):
            value = _composite_nak(params, r, cdf, cfg)
        else:
            value = _composite_inv(params, r, cdf, cfg)
    return min(max(value, 0.0), 1.0) if cdf else value


@elementwise
def composite_pdf_nak(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    require(isinstance(params.product, NakagamiProductParams), "shadow", params.shadow, "needs a Nakagami product")
    return _composite(params, r, False, cfg)


@elementwise
def composite_cdf_nak(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    require(isinstance(params.product, NakagamiProductParams), "shadow", params.shadow, "needs a Nakagami product")
    return _composite(params, r, True, cfg)


@elementwise
def composite_pdf_inv(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    require(isinstance(params.product, InvNakagamiProductParams), "shadow", params.shadow,
            "needs an inverse Nakagami product")
    return _composite(params, r, False, cfg)


@elementwise
def composite_cdf_inv(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    require(isinstance(params.product, InvNakagamiProductParams), "shadow", params.shadow,
            "needs an inverse Nakagami product")
    return _composite(params, r, True, cfg)


@elementwise
def composite_pdf(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    return _composite(params, r, False, cfg)


@elementwise
def composite_cdf(params: CompositeParams, r: float, cfg: Optional[ContourConfig] = None) -> float:
    return _composite(params, r, True, cfg)


def composite_pdf_mixture(alpha: float, mu: float, mixture: MixtureParams, r, omega_r: float = 1.0, cfg=None):
    nak = composite_pdf(CompositeParams(alpha, mu, mixture.nak, omega_r), r, cfg)
    inv = composite_pdf(CompositeParams(alpha, mu, mixture.inv, omega_r), r, cfg)
    return metric_mixture(nak, inv, mixture.p)


def composite_cdf_mixture(alpha: float, mu: float, mixture: MixtureParams, r, omega_r: float = 1.0, cfg=None):
    nak = composite_cdf(CompositeParams(alpha, mu, mixture.nak, omega_r), r, cfg)
    inv = composite_cdf(CompositeParams(alpha, mu, mixture.inv, omega_r), r, cfg)
    return metric_mixture(nak, inv, mixture.p)


def composite_nakagami_lognormal(m_fading: float, shadow, r, omega_r: float = 1.0, cfg=None):
    """Nakagami-m multipath shadowed by a surrogate: the alpha = 2, mu = m case. Returns (pdf, cdf)"""
    params = CompositeParams(alpha=2.0, mu=m_fading, shadow=shadow, omega_r=omega_r)
    return composite_pdf(params, r, cfg), composite_cdf(params, r, cfg)
