"""
Ground truth that does not go through the Mellin-Barnes engine:

    mc_estimate         batched Monte Carlo over counter-based Philox streams
    fft_product_pdf     density of a product by convolving log-domain densities
    quad_expectation    adaptive quadrature of E[g(R)]
    ks_distance         sup-norm distance of two CDFs on a grid
    kl_divergence       trapezoid Kullback-Leibler divergence on a grid
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats
from scipy.integrate import quad, trapezoid, cumulative_trapezoid

from easypy.tokens import LINEAR, LOGARITHMIC

from .configuration import CONF
from .exceptions import AliasingError, UsageError
from .logging import logger, capture_integration_warnings
from .metrics import LinkParams, CompositeParams, conditional_ber, conditional_multipath, instantaneous_snr
from .specfun import log_pochhammer
from .utils import require, parse_token, integrate_log_domain, pairwise_reduce


GRID_SPACINGS = {LINEAR, LOGARITHMIC}
ALIASING_LIMIT = 1e-8
KL_FLOOR = 1e-300
# negative estimates within this of zero are quadrature noise and clamp silently
KL_REPORT_THRESHOLD = 1e-6


# ----------------------------------------------------------------------------------------------------------------------
# Configuration types
# ----------------------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    samples: int = field(default_factory=lambda: CONF.mc_samples)
    seed: int = field(default_factory=lambda: CONF.seed)
    batch_size: int = field(default_factory=lambda: CONF.mc_batch_size)

    def __post_init__(self):
        require(self.samples > 0, "samples", self.samples, "must be positive")
        require(self.batch_size > 0, "batch_size", self.batch_size, "must be positive")
        require(0 <= self.seed < 2 ** 64, "seed", self.seed, "must be a 64-bit unsigned integer")

    @property
    def batch_sizes(self):
        full, rest = divmod(self.samples, self.batch_size)
        return [self.batch_size] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    points: int
    spacing: object = LINEAR

    def __post_init__(self):
        require(self.spacing in GRID_SPACINGS, "spacing", self.spacing, "use lin or log")
        require(self.lower < self.upper, "grid", (self.lower, self.upper), "requires lower < upper")
        require(self.points >= 2, "points", self.points, "needs at least 2 points")
        if self.spacing == LOGARITHMIC:
            require(self.lower > 0, "lower", self.lower, "logarithmic grids need lower > 0")

    def values(self) -> np.ndarray:
        if self.spacing == LOGARITHMIC:
            return np.geomspace(self.lower, self.upper, self.points)
        return np.linspace(self.lower, self.upper, self.points)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """'lo:hi:n:lin' or 'lo:hi:n:log'"""
        parts = text.split(":")
        if len(parts) != 4:
            raise UsageError(detail=f"grid {text!r} is not of the form lo:hi:n:lin|log")
        lo, hi, n, spacing = parts
        try:
            lower, upper, points = float(lo), float(hi), int(n)
        except ValueError:
            raise UsageError(detail=f"grid {text!r} has non-numeric bounds or point count")
        spacing = {"lin": "linear", "log": "logarithmic"}.get(spacing, spacing)
        return cls(lower, upper, points, parse_token(spacing, GRID_SPACINGS, "grid spacing"))

    def __str__(self):
        return f"{self.lower:g}:{self.upper:g}:{self.points}:{'log' if self.spacing == LOGARITHMIC else 'lin'}"


# ----------------------------------------------------------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------------------------------------------------------


@dataclass
class _Moments:
    count: int
    mean: complex
    m2: float

    @classmethod
    def of(cls, values: np.ndarray) -> "_Moments":
        mean = np.mean(values)
        return cls(len(values), mean, float(np.sum(np.abs(values - mean) ** 2)))

    def merge(self, other: "_Moments") -> "_Moments":
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + abs(delta) ** 2 * self.count * other.count / count
        return _Moments(count, mean, m2)


def mc_estimate(sampler: Callable, functional: Callable, cfg: Optional[McConfig] = None):
    """
    Estimate E[functional(R)] with R drawn by sampler(rng, size).

    Batch i draws from Generator(Philox(SeedSequence(seed).spawn(n_batches)[i])) and
    batches are merged pairwise in index order, so the result depends on (seed, samples,
    batch_size) only, not on how the worker threads were scheduled.
    Complex functionals are supported; the standard error is then that of the modulus.
    """
    cfg = cfg or McConfig()
    sizes = cfg.batch_sizes
    streams = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run_batch(index):
        rng = np.random.Generator(np.random.Philox(streams[index]))
        return _Moments.of(np.asarray(functional(sampler(rng, sizes[index]))))

    with ThreadPoolExecutor(max_workers=CONF.worker_threads, thread_name_prefix="mc") as executor:
        batches = list(executor.map(run_batch, range(len(sizes))))

    total = pairwise_reduce(batches, _Moments.merge)
    se = math.sqrt(total.m2 / (total.count - 1) / total.count) if total.count > 1 else 0.0
    mean = complex(total.mean) if np.iscomplexobj(total.mean) else float(total.mean)
    logger.debug(f"monte carlo: {total.count} samples in {len(sizes)} batches, estimate {mean}, se {se:.3e}")
    return mean, se


# ----------------------------------------------------------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------------------------------------------------------


def quad_expectation(density: Callable, integrand: Callable, domain: Tuple[float, float] = (0.0, np.inf),
                     center: Optional[float] = None, epsrel: Optional[float] = None) -> float:
    """
    E[integrand(R)] for R with the given density over `domain`.

    The default positive half-line is integrated in y = log r, split at log(center),
    which maps algebraic and exponential tails to exponentially decaying ones.
    """
    lo, hi = domain

    def weighted(r):
        f = density(r)
        return 0.0 if f == 0 else integrand(r) * f

    if lo == 0 and hi == np.inf:
        return integrate_log_domain(weighted, center or 1.0, epsrel=epsrel, what="expectation")
    epsrel = CONF.tolerance if epsrel is None else epsrel
    with capture_integration_warnings("expectation"):
        value, _ = quad(weighted, lo, hi, epsrel=epsrel, epsabs=1e-14, limit=200)
    return value


def cf_quadrature(density: Callable, omega: float, center: float = 1.0) -> complex:
    real = quad_expectation(density, lambda r: math.cos(omega * r), center=center)
    imag = quad_expectation(density, lambda r: math.sin(omega * r), center=center)
    return complex(real, imag)


def ber_quadrature(density: Callable, mean_power: float, link: LinkParams, center: float = 1.0) -> float:
    return quad_expectation(
        density, lambda r: float(conditional_ber(instantaneous_snr(r, mean_power, link.gamma_bar), link)),
        center=center)


def capacity_quadrature(density: Callable, mean_power: float, link: LinkParams, center: float = 1.0) -> float:
    gamma = lambda r: instantaneous_snr(r, mean_power, link.gamma_bar)  # noqa: E731
    return link.bandwidth * quad_expectation(density, lambda r: math.log2(1.0 + gamma(r)), center=center)


def mixture_quadrature(conditional: Callable, shadow, r: float) -> float:
    """Integral of conditional(r, delta) * shadow.pdf(delta) over delta > 0"""
    return quad_expectation(shadow.pdf, lambda delta: conditional(r, delta), center=shadow.scale)


def composite_quadrature(alpha: float, mu: float, shadow, r: float, omega_r: float = 1.0, cdf: bool = False):
    """Composite alpha-mu statistics averaged over any shadow distribution (exact Lognormal included)"""

    def conditional(x, delta):
        multipath = conditional_multipath(alpha, mu, omega_r, delta)
        return multipath.cdf(x) if cdf else multipath.pdf(x)

    return mixture_quadrature(conditional, shadow, r)


def composite_on_table(alpha: float, mu: float, table: "TabulatedDensity", r, omega_r: float = 1.0, cdf: bool = False):
    """
    Composite statistics averaged over a tabulated shadow density by the trapezoid
    rule on the table's log grid. Vectorised over r.
    """
    log_r_hat = 0.5 * (table.y + math.log(omega_r) - float(log_pochhammer(mu, 2 / alpha))) + math.log(mu) / alpha
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(r.shape)
    for index, x in enumerate(r):
        with np.errstate(all="ignore"):
            t = mu * np.exp(alpha * (math.log(x) - log_r_hat))
            if cdf:
                conditional = special.gammainc(mu, t)
            else:
                conditional = np.exp(stats.gamma.logpdf(t, mu) + np.log(alpha * t / x))
        conditional = np.nan_to_num(conditional, nan=0.0, posinf=0.0)
        out[index] = trapezoid(conditional * table.log_pdf, table.y)
    return out


# ----------------------------------------------------------------------------------------------------------------------
# FFT convolution of log-domain densities
# ----------------------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class LogFactor:
    """Density of log(V) for one product factor V, with its log-mean and log-variance"""

    log_density: Callable
    log_mean: float
    log_var: float
    label: str = "factor"


def log_factor(dist, power: float = 1.0) -> LogFactor:
    """The factor R**power for a distribution exposing log_density, log_mean and log_var"""
    if isinstance(dist, LogFactor):
        return dist
    require(power > 0, "power", power, "must be positive")
    nu, var = dist.log_mean(), dist.log_var()
    return LogFactor(log_density=lambda y: np.asarray(dist.log_density(np.asarray(y) / power)) / power,
                     log_mean=power * nu, log_var=power ** 2 * var,
                     label=f"{getattr(dist, 'name', 'factor')}^{power:g}")


@dataclass(frozen=True)
class TabulatedDensity:
    """
    Product density tabulated on a uniform log grid `y`.
    `log_pdf` is the density of log R; `pdf` the density of R at r = exp(y).
    `error_bound` bounds the log-domain discretisation error (fine vs. half-resolution grid).
    """

    y: np.ndarray
    log_pdf: np.ndarray
    error_bound: float

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.y)

    @property
    def pdf_values(self) -> np.ndarray:
        return self.log_pdf / self.r

    @property
    def step(self) -> float:
        return float(self.y[1] - self.y[0])

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        return np.interp(np.log(r), self.y, self.log_pdf, left=0.0, right=0.0) / r

    def cdf(self, r):
        table = cumulative_trapezoid(self.log_pdf, self.y, initial=0.0)
        return np.clip(np.interp(np.log(np.asarray(r, dtype=float)), self.y, table, left=0.0, right=1.0), 0.0, 1.0)

    def log_density(self, y):
        return np.interp(np.asarray(y, dtype=float), self.y, self.log_pdf, left=0.0, right=0.0)

    def log_mean(self) -> float:
        return float(trapezoid(self.y * self.log_pdf, self.y))

    def log_var(self) -> float:
        nu = self.log_mean()
        return float(trapezoid((self.y - nu) ** 2 * self.log_pdf, self.y))


def _convolve_on_lattice(factors: Sequence[LogFactor], points: int, half_width: float):
    """
    Each factor is sampled on nu_i - W + j h, j < points, with h = 2W / points.
    Convolving two such tables starts at nu_a + nu_b - 2W; dropping points/2 leading
    entries puts the result back on the lattice of the running log-mean.
    """
    h = 2 * half_width / points
    offsets = np.arange(points) * h - half_width
    size = 2 * points
    running, running_mean = None, 0.0
    for index, factor in enumerate(factors):
        values = np.asarray(factor.log_density(factor.log_mean + offsets), dtype=float)
        lost = abs(1.0 - trapezoid(values, dx=h))
        if lost > ALIASING_LIMIT:
            raise AliasingError(mass=f"{lost:.3e}", index=index, limit=ALIASING_LIMIT)
        if running is None:
            running = values
        else:
            spectrum = np.fft.rfft(running, size) * np.fft.rfft(values, size)
            running = np.fft.irfft(spectrum, size)[points // 2: points // 2 + points] * h
            np.clip(running, 0.0, None, out=running)
        running_mean += factor.log_mean
    return running_mean + offsets, running


def fft_product_pdf(factors: Sequence, grid: Optional[GridSpec] = None, points: Optional[int] = None,
                    span: Optional[float] = None) -> TabulatedDensity:
    """
    Density of the product of independent factors, by FFT convolution of their
    log-domain densities on a common uniform grid spanning +-span combined
    log-standard-deviations around the combined log-mean.

    `factors` are LogFactors or distributions (wrapped with log_factor). When `grid`
    is given, the returned table is restricted to the grid's r-range.
    """
    points = points or CONF.fft_points
    span = span or CONF.fft_span
    require(points >= 64 and points % 4 == 0, "points", points, "must be a multiple of 4, at least 64")
    factors = [log_factor(f) for f in factors]
    require(factors, "factors", factors, "needs at least one factor")
    for factor in factors:
        require(math.isfinite(factor.log_var), "log_var", factor.log_var, f"{factor.label} needs finite log-variance")

    half_width = span * math.sqrt(sum(f.log_var for f in factors))
    y, fine = _convolve_on_lattice(factors, points, half_width)
    _, coarse = _convolve_on_lattice(factors, points // 2, half_width)
    error_bound = float(np.max(np.abs(fine[::2] - coarse)))

    lost = abs(1.0 - trapezoid(fine, y))
    if lost > ALIASING_LIMIT:
        raise AliasingError(mass=f"{lost:.3e}", index="product", limit=ALIASING_LIMIT)
    logger.debug(f"fft product of {len(factors)} factors: {points} points, step {y[1] - y[0]:.3e}, "
                 f"discretisation bound {error_bound:.3e}")

    if grid is not None:
        lo, hi = math.log(max(grid.lower, np.finfo(float).tiny)), math.log(grid.upper)
        keep = (y >= lo) & (y <= hi)
        y, fine = y[keep], fine[keep]
    return TabulatedDensity(y=y, log_pdf=fine, error_bound=error_bound)


def product_log_factors(params) -> list:
    """LogFactors of a surrogate product (one per Nakagami or inverse Nakagami factor)"""
    return [log_factor(f) for f in params.factors]


def composite_log_factors(params: CompositeParams) -> list:
    """
    The composite envelope is A * sqrt(delta): the unit-shadow alpha-mu multipath A
    times the square root of each shadow factor.
    """
    multipath = conditional_multipath(params.alpha, params.mu, params.omega_r, 1.0)
    return [log_factor(multipath)] + [log_factor(f, 0.5) for f in params.product.factors]


# ----------------------------------------------------------------------------------------------------------------------
# Distances
# ----------------------------------------------------------------------------------------------------------------------


def _on_grid(func_or_values, x):
    if callable(func_or_values):
        return np.asarray(func_or_values(x), dtype=float)
    return np.asarray(func_or_values, dtype=float)


def ks_distance(cdf_a, cdf_b, grid: GridSpec) -> float:
    x = grid.values()
    return float(np.max(np.abs(_on_grid(cdf_a, x) - _on_grid(cdf_b, x))))


def kl_divergence(pdf_a, pdf_b, grid: GridSpec) -> float:
    """
    KL(a || b) by the trapezoid rule on the grid. Points where either density is
    below 1e-300 are dropped from the support; dropping a point where only b
    vanishes is reported, and so is a clearly negative estimate before it is clamped.
    """
    x = grid.values()
    p, q = _on_grid(pdf_a, x), _on_grid(pdf_b, x)
    support = (p >= KL_FLOOR) & (q >= KL_FLOOR)
    one_sided = int(np.sum((p >= KL_FLOOR) & (q < KL_FLOOR)))
    if one_sided:
        logger.warning(f"kl divergence: clipped {one_sided} grid points where only the second density vanishes")
    integrand = np.zeros_like(x)
    integrand[support] = p[support] * np.log(p[support] / q[support])
    value = float(trapezoid(integrand, x))
    if value < -KL_REPORT_THRESHOLD:
        logger.warning(f"kl divergence evaluated to {value:.3e} on {grid}, clamped to 0; "
                       "the densities may not be normalised over the grid")
    return max(value, 0.0)
