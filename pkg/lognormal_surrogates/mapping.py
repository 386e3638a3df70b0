"""
Mappings between Lognormal targets and product models.

Forward: a Lognormal(nu, sigma) target and a factor count N give the i.i.d.
Nakagami-m or Inverse Nakagami-m product whose log-mean and log-variance equal
the target's. Both families share the variance equation sigma^2 = (N/4) psi'(m).

Reverse: a cascade of alpha-mu, kappa-mu and eta-mu hops gives the Lognormal
its product converges to. alpha-mu blocks use exact log-moments, kappa-mu and
eta-mu blocks use fractional-moment matching.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, List

from scipy import special
from scipy.optimize import brentq
from plumbum import local

from easypy.tokens import (
    Token,
    NAKAGAMI_PRODUCT,
    INV_NAKAGAMI_PRODUCT,
    ALPHA_MU,
    KAPPA_MU,
    ETA_MU,
    MOMENTS,
    QUADRATURE,
)

from .configuration import CONF
from .dists import Lognormal, AlphaMu, KappaMu, EtaMu, ETA_MU_FORMATS
from .exceptions import (
    InfeasibleTarget,
    NonConvergence,
    MomentOverflow,
    SingularMomentOrders,
    CascadeFileError,
    ParameterError,
)
from .logging import logger
from .products import NakagamiProductParams, InvNakagamiProductParams
from .utils import require, parse_token, token_label


SURROGATE_FAMILIES = {NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT}
HOP_FAMILIES = {ALPHA_MU: AlphaMu, KAPPA_MU: KappaMu, ETA_MU: EtaMu}
KAPPA_MU_METHODS = {MOMENTS, QUADRATURE}

# psi'(m) at the lower bracket end is ~1e12, far above any practical 4 sigma^2 / N
SHAPE_BRACKET_LOW = 1e-6
SHAPE_XTOL = 1e-12


@dataclass(frozen=True)
class ForwardSolution:
    family: Token
    n: int
    m: float
    log_omega: float
    residuals: Tuple[float, float]

    def __post_init__(self):
        require(self.family in SURROGATE_FAMILIES, "family", self.family, "not a surrogate family")
        if self.family == INV_NAKAGAMI_PRODUCT:
            require(self.m > 1, "m", self.m, "inverse Nakagami products need m > 1")

    @property
    def omega(self) -> float:
        return math.exp(self.log_omega)

    def to_product(self):
        cls = NakagamiProductParams if self.family == NAKAGAMI_PRODUCT else InvNakagamiProductParams
        return cls.iid_log(self.m, self.log_omega, self.n)

    def as_dict(self):
        return dict(
            family=token_label(self.family), n=self.n, m=self.m,
            omega=self.omega, log_omega=self.log_omega,
            residual_nu=self.residuals[0], residual_sigma2=self.residuals[1],
        )


def _check_n(n):
    require(isinstance(n, int) and n >= 1, "N", n, "must be a positive integer")


def solve_shape(sigma: float, n: int) -> float:
    """The m solving sigma^2 = (n/4) psi'(m); psi' is strictly decreasing so the root is unique"""
    _check_n(n)
    require(sigma > 0, "sigma", sigma, "must be positive")
    target = 4 * sigma ** 2 / n

    def excess(m):
        return special.polygamma(1, m) - target

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2
        if hi > 1e300:
            raise NonConvergence(what="shape bracket", iterations=1000, change=hi, target=target)
    lo = SHAPE_BRACKET_LOW
    if excess(lo) < 0:
        raise ParameterError(name="sigma", value=sigma, reason=f"too large for N={n}")
    if hi > 1:
        lo = max(lo, hi / 2)
    m = brentq(excess, lo, hi, xtol=SHAPE_XTOL, rtol=1e-15, maxiter=200)
    logger.debug(f"shape for sigma={sigma:g}, N={n}: m={m:.12g}")
    return float(m)


def _residuals(product, target: Lognormal):
    nu, var = product.log_stats()
    return nu - target.nu, var - target.sigma ** 2


def _finish(family, target, n, m, log_omega, product_cls):
    residuals = _residuals(product_cls.iid_log(m, log_omega, n), target)
    tolerance = CONF.solver_tolerance
    if max(map(abs, residuals)) > tolerance * max(1.0, abs(target.nu), target.sigma ** 2):
        raise NonConvergence(what=f"{family} forward mapping", iterations=1, change=residuals, target=tolerance)
    return ForwardSolution(family=family, n=n, m=m, log_omega=log_omega, residuals=residuals)


def forward_nakagami(target: Lognormal, n: int) -> ForwardSolution:
    m = solve_shape(target.sigma, n)
    log_omega = 2 * target.nu + n * (math.log(m) - special.psi(m))
    return _finish(NAKAGAMI_PRODUCT, target, n, m, log_omega, NakagamiProductParams)


def min_inv_factors(sigma: float) -> int:
    """Smallest N with sigma^2 < N pi^2 / 24"""
    return int(math.floor(24 * sigma ** 2 / math.pi ** 2)) + 1


def forward_inv_nakagami(target: Lognormal, n: int) -> ForwardSolution:
    _check_n(n)
    bound = n * math.pi ** 2 / 24
    if not target.sigma ** 2 < bound:
        raise InfeasibleTarget(family="inverse Nakagami-m", n=n, sigma=target.sigma,
                               bound=round(bound, 6), n_min=min_inv_factors(target.sigma))
    m = solve_shape(target.sigma, n)
    log_omega = 2 * target.nu - n * math.log(m - 1) + n * special.psi(m)
    return _finish(INV_NAKAGAMI_PRODUCT, target, n, m, log_omega, InvNakagamiProductParams)


def forward(target: Lognormal, n: int, family: Token) -> ForwardSolution:
    if family == NAKAGAMI_PRODUCT:
        return forward_nakagami(target, n)
    return forward_inv_nakagami(target, n)


# ----------------------------------------------------------------------------------------------------------------------
# Reverse direction
# ----------------------------------------------------------------------------------------------------------------------


def _lognormal(nu, var, what):
    if not (math.isfinite(nu) and math.isfinite(var)) or var <= 0:
        raise ParameterError(name=f"{what} log-variance", value=var, reason="moment matching produced no valid Lognormal")
    return Lognormal(nu=nu, sigma=math.sqrt(var))


def _log_moment_product(hops, k):
    try:
        total = math.fsum(h.log_moment(k) for h in hops)
    except (OverflowError, ValueError):
        raise MomentOverflow(k=k)
    if not math.isfinite(total):
        raise MomentOverflow(k=k)
    return total


def reverse_alpha_mu_product(hops: Sequence[AlphaMu]) -> Lognormal:
    require(len(hops) >= 1, "hops", hops, "needs at least one hop")
    return _lognormal(math.fsum(h.log_mean() for h in hops), math.fsum(h.log_var() for h in hops), "alpha-mu")


def reverse_kappa_mu_product(hops: Sequence[KappaMu], k: Optional[float] = None, method=MOMENTS) -> Lognormal:
    require(len(hops) >= 1, "hops", hops, "needs at least one hop")
    require(method in KAPPA_MU_METHODS, "method", method, "use MOMENTS or QUADRATURE")
    nu = math.fsum(h.log_mean() for h in hops)
    if method == QUADRATURE:
        return _lognormal(nu, math.fsum(h.log_var() for h in hops), "kappa-mu")
    k = 1 / len(hops) if k is None else k
    require(k > 0, "k", k, "must be positive")
    log_k = _log_moment_product(hops, k)
    return _lognormal(nu, (2 * log_k - 2 * k * nu) / k ** 2, "kappa-mu")


def reverse_eta_mu_product(hops: Sequence[EtaMu], k1: Optional[float] = None, k2: Optional[float] = None) -> Lognormal:
    require(len(hops) >= 1, "hops", hops, "needs at least one hop")
    k1 = 1 / len(hops) if k1 is None else k1
    k2 = 2 / len(hops) if k2 is None else k2
    require(k1 > 0, "k1", k1, "must be positive")
    require(k2 > 0, "k2", k2, "must be positive")
    if k1 == k2:
        raise SingularMomentOrders(k=k1)
    log_k1 = _log_moment_product(hops, k1)
    log_k2 = _log_moment_product(hops, k2)
    nu = (k1 ** 2 * log_k2 - k2 ** 2 * log_k1) / (k1 * k2 * (k1 - k2))
    var = (2 * k1 * log_k2 - 2 * k2 * log_k1) / (k1 * k2 * (k2 - k1))
    return _lognormal(nu, var, "eta-mu")


# ----------------------------------------------------------------------------------------------------------------------
# Cascades
# ----------------------------------------------------------------------------------------------------------------------


def hop_family(hop) -> Token:
    for family, cls in HOP_FAMILIES.items():
        if isinstance(hop, cls):
            return family
    raise ParameterError(name="hop", value=hop, reason="must be AlphaMu, KappaMu or EtaMu")


@dataclass(frozen=True)
class CascadeSpec:
    hops: Tuple[object, ...]
    k: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    kappa_mu_method: Token = MOMENTS

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        require(len(self.hops) >= 1, "hops", self.hops, "a cascade needs at least one hop")
        for hop in self.hops:
            hop_family(hop)
        for name in ("k", "k1", "k2"):
            value = getattr(self, name)
            require(value is None or value > 0, name, value, "moment orders must be positive")

    def blocks(self):
        """Hops grouped by family, in order of first appearance"""
        grouped = {}
        for hop in self.hops:
            grouped.setdefault(hop_family(hop), []).append(hop)
        return grouped

    @classmethod
    def from_json(cls, path, eta_mu_format=None, kappa_mu_method=MOMENTS) -> "CascadeSpec":
        path = local.path(path)
        try:
            entries = json.loads(path.read())
        except (OSError, ValueError) as exc:
            raise CascadeFileError(path=path, reason=str(exc))
        if not isinstance(entries, list) or not entries:
            raise CascadeFileError(path=path, reason="expected a non-empty JSON array of hops")
        return cls.from_entries(entries, source=path, eta_mu_format=eta_mu_format, kappa_mu_method=kappa_mu_method)

    @classmethod
    def from_entries(cls, entries: List[dict], source="<entries>", eta_mu_format=None,
                     kappa_mu_method=MOMENTS) -> "CascadeSpec":
        eta_mu_format = eta_mu_format or CONF.eta_mu_format
        hops, orders = [], {}
        for index, entry in enumerate(entries):
            try:
                family = parse_token(str(entry["family"]), HOP_FAMILIES, "family")
                entry = dict(entry)
                entry.pop("family")
                for name in ("k", "k1", "k2"):
                    if name in entry:
                        value = float(entry.pop(name))
                        if orders.setdefault(name, value) != value:
                            raise CascadeFileError(path=source, reason=f"hop {index} sets {name}={value}, "
                                                                       f"conflicting with {orders[name]}")
                if family == ETA_MU:
                    fmt = entry.pop("format", None)
                    entry["format"] = parse_token(fmt, ETA_MU_FORMATS, "format") \
                        if fmt else eta_mu_format
                hops.append(HOP_FAMILIES[family](**{k: (v if k == "format" else float(v)) for k, v in entry.items()}))
            except (KeyError, TypeError, ValueError) as exc:
                raise CascadeFileError(path=source, reason=f"hop {index}: {exc!r}")
        return cls(hops=tuple(hops), kappa_mu_method=kappa_mu_method, **orders)


@dataclass(frozen=True)
class BlockResult:
    family: Token
    hops: int
    target: Lognormal
    orders: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(family=token_label(self.family), hops=self.hops,
                    nu=self.target.nu, sigma=self.target.sigma, **self.orders)


def reverse_cascade_blocks(spec: CascadeSpec) -> List[BlockResult]:
    results = []
    for family, hops in spec.blocks().items():
        if family == ALPHA_MU:
            results.append(BlockResult(family, len(hops), reverse_alpha_mu_product(hops)))
        elif family == KAPPA_MU:
            k = 1 / len(hops) if spec.k is None else spec.k
            target = reverse_kappa_mu_product(hops, k, method=spec.kappa_mu_method)
            orders = dict(k=k) if spec.kappa_mu_method == MOMENTS else {}
            results.append(BlockResult(family, len(hops), target, orders))
        else:
            k1 = 1 / len(hops) if spec.k1 is None else spec.k1
            k2 = 2 / len(hops) if spec.k2 is None else spec.k2
            results.append(BlockResult(family, len(hops), reverse_eta_mu_product(hops, k1, k2), dict(k1=k1, k2=k2)))
    return results


def combine_blocks(blocks: Sequence[BlockResult]) -> Lognormal:
    """Independent log terms add: means and variances sum"""
    nu = math.fsum(b.target.nu for b in blocks)
    var = math.fsum(b.target.sigma ** 2 for b in blocks)
    return Lognormal(nu=nu, sigma=math.sqrt(var))


def reverse_cascade(spec: CascadeSpec) -> Lognormal:
    return combine_blocks(reverse_cascade_blocks(spec))
