"""
Named validation scenarios, run by `validate`.

Each scenario compares library values against an independent reference (published
tables, Monte Carlo, FFT convolution or quadrature) and returns its comparisons.
Every comparison carries its own tolerance and criterion, so a report is
self-describing.
"""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from easypy.caching import cached_property
from easypy.tokens import LOGARITHMIC

from .configuration import CONF
from .dists import Lognormal
from .exceptions import UnknownScenario
from .logging import logger
from .mapping import (
    NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT, QUADRATURE,
    CascadeSpec, forward, reverse_cascade_blocks, combine_blocks,
)
from .metrics import (
    LinkParams, CompositeParams, characteristic_function, bit_error_rate, capacity,
    conditional_ber, instantaneous_snr, composite_pdf, composite_cdf,
)
from .oracle import (
    McConfig, GridSpec, mc_estimate, cf_quadrature, ber_quadrature, capacity_quadrature,
    fft_product_pdf, product_log_factors, composite_log_factors, composite_on_table, ks_distance,
)
from .products import NakagamiProductParams, MixtureParams
from .specfun import ContourConfig
from .utils import token_label


# (nu, sigma, N) -> published surrogate parameters, two decimals
TABLE1_REFERENCE = {
    (0.5, 0.5, 5): dict(m=5.48, omega_nak=4.35, omega_inv=4.65),
    (-1.0, 1.0, 5): dict(m=1.69, omega_nak=0.69, omega_inv=2.37),
    (-1.0, 1.0, 10): dict(m=2.97, omega_nak=0.80, omega_inv=1.39),
    (0.5, 0.5, 10): dict(m=10.49, omega_nak=4.41, omega_inv=4.56),
}
TABLE1_TOLERANCE = 0.01

TABLE2_REFERENCE = {"alpha-mu": (4.23, 0.67), "kappa-mu": (3.94, 0.56), "eta-mu": (5.27, 0.60)}
TABLE2_TOLERANCE = 0.01

CONVERGENCE_TARGET = (0.5, 0.5)
CONVERGENCE_FACTORS = (2, 5, 10, 20)

METRIC_OMEGAS = (0.5, 1.0, 5.0)
METRIC_SNRS = (1.0, 10.0, 100.0)
METRIC_RELATIVE_TOLERANCE = 1e-6
MC_STANDARD_ERRORS = 3.0
RAYLEIGH_TOLERANCE = 1e-10

COMPOSITE_CASES = ((3.5, 2.0), (2.0, 2.0))
DISPATCH_CASES = ((4.0, 2.0), (2.0, 2.0))
ORACLE_TOLERANCE = 1e-4
DISPATCH_TOLERANCE = 1e-5

FAMILIES = (NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT)


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class Comparison:
    """
    criterion:
        abs   |value - reference| <= tolerance
        rel   |value - reference| / |reference| <= tolerance
        se    |value - reference| / reference_se <= tolerance
        less  value < reference
    """

    quantity: str
    at: object
    value: object
    reference: object
    tolerance: float
    criterion: str = "abs"
    reference_se: Optional[float] = None
    error: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        diff = abs(complex(self.value) - complex(self.reference))
        if self.criterion == "abs":
            self.error = diff
        elif self.criterion == "rel":
            self.error = diff / abs(complex(self.reference)) if self.reference != 0 else diff
        elif self.criterion == "se":
            self.error = diff / self.reference_se if self.reference_se else diff
        elif self.criterion == "less":
            self.error = float(self.value) - float(self.reference)
        else:
            assert False, f"invalid criterion: {self.criterion}"
        self.passed = bool(self.error < 0) if self.criterion == "less" else bool(self.error <= self.tolerance)

    def as_dict(self):
        return {k: _jsonable(v) for k, v in vars(self).items() if v is not None}


@dataclass
class ValidationReport:
    scenario: str
    comparisons: List[Comparison]
    distances: dict = field(default_factory=dict)
    timings: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    @property
    def failures(self) -> List[Comparison]:
        return [c for c in self.comparisons if not c.passed]

    def as_dict(self):
        out = dict(scenario=self.scenario, passed=self.passed,
                   comparisons=[c.as_dict() for c in self.comparisons],
                   distances={k: _jsonable(v) for k, v in self.distances.items()})
        if self.timings is not None:
            out["timings"] = self.timings
        return out


class ValidationContext:
    """Shared inputs of the scenarios; surrogates are solved once per run"""

    def __init__(self, mc: Optional[McConfig] = None, contour: Optional[ContourConfig] = None):
        self.mc = mc or McConfig()
        self.contour = contour or ContourConfig()
        self.tight = ContourConfig(rtol=1e-10)

    @cached_property
    def table1(self):
        solutions = {}
        for (nu, sigma, n) in TABLE1_REFERENCE:
            for family in FAMILIES:
                solutions[(nu, sigma, n, family)] = forward(Lognormal(nu, sigma), n, family)
        return solutions

    def surrogate(self, nu, sigma, n, family):
        key = (nu, sigma, n, family)
        if key not in self.table1:
            self.table1[key] = forward(Lognormal(nu, sigma), n, family)
        return self.table1[key]


SCENARIOS = {}


def scenario(name):
    def register(func):
        SCENARIOS[name] = func
        return func
    return register


def _label(nu, sigma, n, family=None):
    text = f"nu={nu:g},sigma={sigma:g},N={n}"
    return f"{token_label(family)}({text})" if family is not None else text


@scenario("table1")
def table1(ctx: ValidationContext):
    comparisons = []
    for (nu, sigma, n), reference in TABLE1_REFERENCE.items():
        nak = ctx.surrogate(nu, sigma, n, NAKAGAMI_PRODUCT)
        inv = ctx.surrogate(nu, sigma, n, INV_NAKAGAMI_PRODUCT)
        at = _label(nu, sigma, n)
        comparisons.append(Comparison("m", at, nak.m, reference["m"], TABLE1_TOLERANCE))
        comparisons.append(Comparison("m (families agree)", at, inv.m, nak.m, 1e-12))
        comparisons.append(Comparison("omega nakagami-product", at, nak.omega, reference["omega_nak"],
                                      TABLE1_TOLERANCE))
        comparisons.append(Comparison("omega inv-nakagami-product", at, inv.omega, reference["omega_inv"],
                                      TABLE1_TOLERANCE))
        for solution in (nak, inv):
            comparisons.append(Comparison("forward residual", _label(nu, sigma, n, solution.family),
                                          max(map(abs, solution.residuals)), 0.0, CONF.solver_tolerance))
    return comparisons, {}


@scenario("table2")
def table2(ctx: ValidationContext):
    spec = CascadeSpec.from_json(CONF.cascade_table2)
    blocks = reverse_cascade_blocks(spec)
    comparisons = []
    for block in blocks:
        family = token_label(block.family)
        nu_ref, sigma_ref = TABLE2_REFERENCE[family]
        comparisons.append(Comparison("nu", family, block.target.nu, nu_ref, TABLE2_TOLERANCE))
        comparisons.append(Comparison("sigma", family, block.target.sigma, sigma_ref, TABLE2_TOLERANCE))
    total = combine_blocks(blocks)
    comparisons.append(Comparison("nu", "total", total.nu, math.fsum(v[0] for v in TABLE2_REFERENCE.values()),
                                  len(blocks) * TABLE2_TOLERANCE))

    quad_spec = CascadeSpec.from_json(CONF.cascade_table2, kappa_mu_method=QUADRATURE)
    quad_blocks = {token_label(b.family): b for b in reverse_cascade_blocks(quad_spec)}
    distances = {"kappa-mu sigma by quadrature": quad_blocks["kappa-mu"].target.sigma,
                 "total sigma": total.sigma}
    return comparisons, distances


@scenario("convergence")
def convergence(ctx: ValidationContext):
    nu, sigma = CONVERGENCE_TARGET
    target = Lognormal(nu, sigma)
    grid = GridSpec(math.exp(nu - 6 * sigma), math.exp(nu + 6 * sigma), 200, LOGARITHMIC)
    exact = target.cdf(grid.values())

    comparisons, distances, ks = [], {}, {}
    for family in FAMILIES:
        previous = None
        for n in CONVERGENCE_FACTORS:
            params = ctx.surrogate(nu, sigma, n, family).to_product()
            ks[family, n] = ks_distance(params.cdf(grid.values(), ctx.contour), exact, grid)
            distances[f"ks {_label(nu, sigma, n, family)}"] = ks[family, n]
            if previous is not None:
                comparisons.append(Comparison("ks decreasing in N", _label(nu, sigma, n, family),
                                              ks[family, n], ks[family, previous], 0.0, criterion="less"))
            previous = n

    n = 5
    mixture = MixtureParams(nak=ctx.surrogate(nu, sigma, n, NAKAGAMI_PRODUCT).to_product(),
                            inv=ctx.surrogate(nu, sigma, n, INV_NAKAGAMI_PRODUCT).to_product(), p=0.5)
    mixture_ks = ks_distance(mixture.cdf(grid.values(), ctx.contour), exact, grid)
    distances[f"ks mixture(p=0.5,{_label(nu, sigma, n)})"] = mixture_ks
    for family in FAMILIES:
        comparisons.append(Comparison("ks mixture below component", _label(nu, sigma, n, family),
                                      mixture_ks, ks[family, n], 0.0, criterion="less"))
    return comparisons, distances


@scenario("closed-form")
def closed_form(ctx: ValidationContext):
    comparisons, distances = [], {}
    for (nu, sigma, n) in TABLE1_REFERENCE:
        grid = GridSpec(math.exp(nu - 4 * sigma), math.exp(nu + 4 * sigma), 200, LOGARITHMIC)
        r = grid.values()
        for family in FAMILIES:
            params = ctx.surrogate(nu, sigma, n, family).to_product()
            table = fft_product_pdf(product_log_factors(params))
            at = _label(nu, sigma, n, family)
            pdf_error = float(np.max(np.abs(params.pdf(r, ctx.contour) - table.pdf(r))))
            cdf_error = float(np.max(np.abs(params.cdf(r, ctx.contour) - table.cdf(r))))
            comparisons.append(Comparison("pdf vs fft convolution", at, pdf_error, 0.0, ORACLE_TOLERANCE))
            comparisons.append(Comparison("cdf vs integrated pdf", at, cdf_error, 0.0, ORACLE_TOLERANCE))
            distances[f"fft discretisation bound {at}"] = table.error_bound
    return comparisons, distances


def _metric_comparisons(ctx, params, family_label, center):
    comparisons = []
    density = lambda r: params.pdf(r, ctx.tight)  # noqa: E731
    mean_power = params.moment(2)

    for omega in METRIC_OMEGAS:
        at = f"{family_label},omega={omega:g}"
        value = complex(characteristic_function(params, omega, ctx.tight))
        comparisons.append(Comparison("cf vs quadrature", at, value, cf_quadrature(density, omega, center),
                                      METRIC_RELATIVE_TOLERANCE, "rel"))
        estimate, se = mc_estimate(params.sample, lambda x, w=omega: np.exp(1j * w * x), ctx.mc)
        comparisons.append(Comparison("cf vs monte carlo", at, value, estimate, MC_STANDARD_ERRORS, "se", se))

    for gamma_bar in METRIC_SNRS:
        link = LinkParams(gamma_bar=gamma_bar)
        at = f"{family_label},gamma_bar={gamma_bar:g}"
        snr = lambda x, lk=link: instantaneous_snr(x, mean_power, lk.gamma_bar)  # noqa: E731

        ber = bit_error_rate(params, link, ctx.tight)
        comparisons.append(Comparison("ber vs quadrature", at, ber, ber_quadrature(density, mean_power, link, center),
                                      METRIC_RELATIVE_TOLERANCE, "rel"))
        estimate, se = mc_estimate(params.sample, lambda x, lk=link: conditional_ber(snr(x, lk), lk), ctx.mc)
        comparisons.append(Comparison("ber vs monte carlo", at, ber, estimate, MC_STANDARD_ERRORS, "se", se))

        cap = capacity(params, link, ctx.tight)
        comparisons.append(Comparison("capacity vs quadrature", at, cap,
                                      capacity_quadrature(density, mean_power, link, center),
                                      METRIC_RELATIVE_TOLERANCE, "rel"))
        estimate, se = mc_estimate(params.sample, lambda x, lk=link: lk.bandwidth * np.log2(1 + snr(x, lk)), ctx.mc)
        comparisons.append(Comparison("capacity vs monte carlo", at, cap, estimate, MC_STANDARD_ERRORS, "se", se))
    return comparisons


@scenario("metrics")
def metrics(ctx: ValidationContext):
    nu, sigma, n = 0.5, 0.5, 5
    comparisons = []
    for family in FAMILIES:
        params = ctx.surrogate(nu, sigma, n, family).to_product()
        comparisons.extend(_metric_comparisons(ctx, params, _label(nu, sigma, n, family), math.exp(nu)))

    rayleigh = NakagamiProductParams.iid(m=1.0, omega=1.0, n=1)
    exact_cfg = ContourConfig(rtol=1e-12)
    for gamma_bar in METRIC_SNRS:
        ber = bit_error_rate(rayleigh, LinkParams(gamma_bar=gamma_bar), exact_cfg)
        comparisons.append(Comparison("rayleigh dbpsk ber", f"gamma_bar={gamma_bar:g}", ber,
                                      1 / (2 * (1 + gamma_bar)), RAYLEIGH_TOLERANCE))
    return comparisons, {}


@scenario("composite")
def composite(ctx: ValidationContext):
    nu, sigma, n = 0.5, 0.5, 5
    grid = GridSpec(0.1, 8.0, 100, LOGARITHMIC)
    r = grid.values()
    comparisons, distances = [], {}
    for family in FAMILIES:
        shadow = ctx.surrogate(nu, sigma, n, family)
        table = fft_product_pdf(product_log_factors(shadow.to_product()))
        for alpha, mu in COMPOSITE_CASES:
            params = CompositeParams(alpha=alpha, mu=mu, shadow=shadow)
            at = f"{_label(nu, sigma, n, family)},alpha={alpha:g},mu={mu:g}"
            pdf = composite_pdf(params, r, ctx.contour)
            cdf = composite_cdf(params, r, ctx.contour)
            pdf_error = float(np.max(np.abs(pdf - composite_on_table(alpha, mu, table, r))))
            cdf_error = float(np.max(np.abs(cdf - composite_on_table(alpha, mu, table, r, cdf=True))))
            comparisons.append(Comparison("composite pdf vs quadrature", at, pdf_error, 0.0, ORACLE_TOLERANCE))
            comparisons.append(Comparison("composite cdf vs quadrature", at, cdf_error, 0.0, ORACLE_TOLERANCE))

            product = fft_product_pdf(composite_log_factors(params))
            fft_error = float(np.max(np.abs(pdf - product.pdf(r))))
            comparisons.append(Comparison("composite pdf vs fft product", at, fft_error, 0.0, ORACLE_TOLERANCE))

        for alpha, mu in DISPATCH_CASES:
            params = CompositeParams(alpha=alpha, mu=mu, shadow=shadow)
            general = params.with_general_path()
            at = f"{_label(nu, sigma, n, family)},alpha={alpha:g},mu={mu:g}"
            points = r[::10]
            for name, func in (("pdf", composite_pdf), ("cdf", composite_cdf)):
                special_values = func(params, points, ctx.contour)
                general_values = func(general, points, ctx.contour)
                error = float(np.max(np.abs(special_values - general_values) / np.abs(general_values)))
                comparisons.append(Comparison(f"composite {name} {params.path} vs fox-h path", at, error, 0.0,
                                              DISPATCH_TOLERANCE))
            distances[f"composite paths {at}"] = params.path
    return comparisons, distances


def run_scenarios(names, ctx: Optional[ValidationContext] = None, timings: bool = False) -> List[ValidationReport]:
    if "all" in names:
        names = list(SCENARIOS)
    unknown = [name for name in names if name not in SCENARIOS]
    if unknown:
        raise UnknownScenario(name=unknown[0], choices="|".join(list(SCENARIOS) + ["all"]))

    ctx = ctx or ValidationContext()
    reports = []
    for name in names:
        logger.info(f"running scenario {name}")
        started = time.perf_counter()
        comparisons, distances = SCENARIOS[name](ctx)
        elapsed = time.perf_counter() - started
        report = ValidationReport(name, comparisons, distances, dict(seconds=round(elapsed, 3)) if timings else None)
        logger.info(f"scenario {name}: {len(comparisons) - len(report.failures)}/{len(comparisons)} passed")
        for failure in report.failures:
            logger.warning(f"{name}: {failure.quantity} at {failure.at} off by {failure.error:.3e} "
                           f"(tolerance {failure.tolerance:g}, {failure.criterion})")
        reports.append(report)
    return reports
