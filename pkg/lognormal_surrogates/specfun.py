"""
Special functions and a Mellin-Barnes engine for Meijer-G and Fox-H.

Scalar functions wrap scipy.special with domain checks that raise our exceptions
instead of returning nan/inf. The G and H functions are evaluated by integrating
the Mellin-Barnes integrand along a vertical line that separates the two pole
families, with the trapezoid rule (spectrally accurate for analytic integrands
decaying on a line). Repeated parameters need no special treatment.

Everything here is a pure function of its arguments.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar

from .configuration import CONF
from .exceptions import (
    DomainError,
    PoleError,
    ParameterError,
    BesselOverflow,
    SeriesDivergence,
    ContourPlacementError,
    DecayCheckFailed,
    NonConvergence,
)
from .logging import logger


# I_v(x) ~ e^x / sqrt(2 pi x); beyond this exp() overflows a double
BESSEL_EXPONENT_LIMIT = 700.0

# contour results are dropped once a bound on them sits this far below the smallest subnormal
LOG_SMALLEST_DOUBLE = math.log(5e-324)
UNDERFLOW_MARGIN = 10.0


def _is_nonpositive_integer(x) -> bool:
    return x <= 0 and float(x).is_integer()


def _as_positive(x, func):
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        bad = arr[~(arr > 0)].flat[0]
        raise DomainError(func=func, arg="x", value=float(bad), reason="requires x > 0")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# ----------------------------------------------------------------------------------------------------------------------
# Gamma family
# ----------------------------------------------------------------------------------------------------------------------


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z)"""
    z = complex(z)
    if z.imag == 0 and _is_nonpositive_integer(z.real):
        raise PoleError(func="log_gamma", arg="z", value=z.real)
    return complex(special.loggamma(z))


def digamma(x):
    return _scalar_or_array(special.psi(_as_positive(x, "digamma")))


def trigamma(x):
    return _scalar_or_array(special.polygamma(1, _as_positive(x, "trigamma")))


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Non-regularised Gamma(s, x), computed in log-space to survive large s"""
    if not s > 0:
        raise DomainError(func="upper_incomplete_gamma", arg="s", value=s, reason="requires s > 0")
    if not x >= 0:
        raise DomainError(func="upper_incomplete_gamma", arg="x", value=x, reason="requires x >= 0")
    q = special.gammaincc(s, x)
    if q == 0:
        return 0.0
    return math.exp(math.log(q) + special.gammaln(s))


def log_pochhammer(a, k):
    """log of (a)_k = Gamma(a + k) / Gamma(a), for a > 0 and a + k > 0"""
    return special.gammaln(np.add(a, k)) - special.gammaln(a)


# ----------------------------------------------------------------------------------------------------------------------
# Bessel and hypergeometric functions
# ----------------------------------------------------------------------------------------------------------------------


def bessel_i(order: float, x: float) -> float:
    if not order > -1:
        raise DomainError(func="bessel_i", arg="order", value=order, reason="requires order > -1")
    if not x >= 0:
        raise DomainError(func="bessel_i", arg="x", value=x, reason="requires x >= 0")
    if x > BESSEL_EXPONENT_LIMIT:
        raise BesselOverflow(order=order, x=x, limit=BESSEL_EXPONENT_LIMIT)
    return float(special.iv(order, x))


def log_bessel_ive(order, x):
    """log of the exponentially scaled Bessel function, e^-x I_order(x)"""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = special.ive(order, x)
        # ive gives up (nan or 0) for huge arguments, where two asymptotic terms are exact to double precision
        asymptotic = -0.5 * np.log(2 * np.pi * x) - (4 * np.square(order) - 1) / (8 * x)
        lost = (~np.isfinite(scaled) | (scaled == 0)) & (x > BESSEL_EXPONENT_LIMIT)
        out = np.where(lost, asymptotic, np.log(scaled))
    return _scalar_or_array(out)


def log_bessel_i(order, x):
    """log I_order(x), usable far beyond the overflow limit"""
    return _scalar_or_array(np.asarray(log_bessel_ive(order, x)) + np.asarray(x, dtype=float))


def kummer_1f1(a: float, b: float, z: float) -> float:
    if _is_nonpositive_integer(b):
        raise PoleError(func="kummer_1f1", arg="b", value=b)
    if z < 0 and b - a > 0:
        # Kummer's transformation turns the alternating series into a positive one
        return float(math.exp(z) * special.hyp1f1(b - a, b, -z))
    return float(special.hyp1f1(a, b, z))


def kummer_1f1_da_at_zero(b: float, z: float, max_terms: Optional[int] = None) -> float:
    """
    Derivative of 1F1(a; b; z) with respect to `a`, at a = 0.

    For z >= 0 the direct series sum_{n>=1} z^n / (n (b)_n) is summed. For z < 0
    the Kummer-transformed form -e^z sum_{n>=1} (-z)^n/n! (psi(b+n) - psi(b))
    is used instead, since all of its terms are positive.
    """
    if not b > 0:
        raise DomainError(func="kummer_1f1_da_at_zero", arg="b", value=b, reason="requires b > 0")
    if z == 0:
        return 0.0
    max_terms = max_terms or CONF.series_max_terms
    tol = CONF.tolerance * 1e-3
    total = 0.0

    if z > 0:
        ratio = 1.0  # z^n / (b)_n
        for n in range(1, max_terms + 1):
            ratio *= z / (b + n - 1)
            term = ratio / n
            total += term
            if n > z and abs(term) <= tol * abs(total):
                return total
    else:
        w = -z
        weight = 1.0  # w^n / n!
        harmonic = 0.0  # psi(b + n) - psi(b)
        for n in range(1, max_terms + 1):
            weight *= w / n
            harmonic += 1.0 / (b + n - 1)
            term = weight * harmonic
            total += term
            if n > w and term <= tol * total:
                return -math.exp(z) * total

    raise SeriesDivergence(what="1F1 a-derivative", terms=max_terms)


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    if _is_nonpositive_integer(c):
        raise PoleError(func="gauss_2f1", arg="c", value=c)
    if not abs(z) < 1:
        raise DomainError(func="gauss_2f1", arg="z", value=z, reason="requires |z| < 1")
    return float(special.hyp2f1(a, b, c, z))


# ----------------------------------------------------------------------------------------------------------------------
# Meijer-G / Fox-H specifications
# ----------------------------------------------------------------------------------------------------------------------


def _check_counts(m, n, p, q):
    if not (0 <= m <= q and 0 <= n <= p):
        raise ParameterError(name="(m, n, p, q)", value=(m, n, p, q), reason="requires m <= q and n <= p")
    if m + n == 0:
        raise ParameterError(name="(m, n)", value=(m, n), reason="the integrand has no gamma factor in the numerator")


def _resolve_argument(spec):
    """Fills whichever of x and log_x was left out; log_x alone may describe an x outside double range"""
    if spec.log_x is None:
        if spec.x is None or not 0 < spec.x < math.inf:
            raise ParameterError(name="x", value=spec.x, reason="requires x > 0")
        object.__setattr__(spec, "log_x", math.log(spec.x))
    else:
        if not math.isfinite(spec.log_x):
            raise ParameterError(name="log_x", value=spec.log_x, reason="must be finite")
        with np.errstate(over="ignore", under="ignore"):
            object.__setattr__(spec, "x", float(np.exp(spec.log_x)))


def _describe_argument(spec):
    return f"{spec.x:.6g}" if 0 < spec.x < math.inf else f"exp({spec.log_x:.6g})"


@dataclass(frozen=True)
class MeijerGSpec:
    """G^{m,n}_{p,q}(x | a_params; b_params), with p and q implied by the list lengths"""

    m: int
    n: int
    a_params: Tuple[float, ...]
    b_params: Tuple[float, ...]
    x: Optional[float] = None
    log_x: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(a) for a in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(b) for b in self.b_params))
        _check_counts(self.m, self.n, self.p, self.q)
        if not all(map(math.isfinite, self.a_params + self.b_params)):
            raise ParameterError(name="params", value=(self.a_params, self.b_params), reason="must be finite")
        _resolve_argument(self)
        for a in self.a_params[:self.n]:
            for b in self.b_params[:self.m]:
                d = a - b
                if d >= 1 and d.is_integer():
                    raise PoleError(func="meijer_g", arg="a - b", value=d)

    @property
    def p(self):
        return len(self.a_params)

    @property
    def q(self):
        return len(self.b_params)

    def to_fox(self) -> "FoxHSpec":
        return FoxHSpec(
            m=self.m, n=self.n, x=self.x, log_x=self.log_x,
            a_params=tuple((a, 1.0) for a in self.a_params),
            b_params=tuple((b, 1.0) for b in self.b_params),
        )

    def __str__(self):
        return (f"G^{{{self.m},{self.n}}}_{{{self.p},{self.q}}}"
                f"({_describe_argument(self)} | {list(self.a_params)}; {list(self.b_params)})")


@dataclass(frozen=True)
class FoxHSpec:
    """H^{m,n}_{p,q}(x | (a_i, A_i); (b_j, B_j))"""

    m: int
    n: int
    a_params: Tuple[Tuple[float, float], ...]
    b_params: Tuple[Tuple[float, float], ...]
    x: Optional[float] = None
    log_x: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple((float(v), float(s)) for v, s in self.a_params))
        object.__setattr__(self, "b_params", tuple((float(v), float(s)) for v, s in self.b_params))
        _check_counts(self.m, self.n, self.p, self.q)
        pairs = self.a_params + self.b_params
        if not all(math.isfinite(v) and math.isfinite(s) for v, s in pairs):
            raise ParameterError(name="params", value=pairs, reason="must be finite")
        if not all(s > 0 for _, s in pairs):
            raise ParameterError(name="scales", value=[s for _, s in pairs], reason="must be strictly positive")
        _resolve_argument(self)

    @property
    def p(self):
        return len(self.a_params)

    @property
    def q(self):
        return len(self.b_params)

    def __str__(self):
        return (f"H^{{{self.m},{self.n}}}_{{{self.p},{self.q}}}"
                f"({_describe_argument(self)} | {list(self.a_params)}; {list(self.b_params)})")


@dataclass(frozen=True)
class ContourConfig:
    """
    Controls the contour quadrature.

    shift: abscissa of the vertical contour; None places it automatically
    half_height: initial truncation height, doubled until the integrand has decayed
    nodes: trapezoid nodes on [0, half_height] before refinement
    rtol: relative tolerance between successive step-halvings
    """

    shift: Optional[float] = None
    half_height: float = 8.0
    nodes: int = 64
    rtol: float = field(default_factory=lambda: CONF.contour_tolerance)
    max_refinements: int = 12
    max_height: float = 4096.0

    def __post_init__(self):
        if not 0 < self.rtol < 1:
            raise ParameterError(name="rtol", value=self.rtol, reason="must lie in (0, 1)")
        if self.nodes < 64:
            raise ParameterError(name="nodes", value=self.nodes, reason="must be at least 64")
        if not self.half_height > 0:
            raise ParameterError(name="half_height", value=self.half_height, reason="must be positive")


# ----------------------------------------------------------------------------------------------------------------------
# Mellin-Barnes engine
# ----------------------------------------------------------------------------------------------------------------------


class _MellinBarnesKernel:
    """log of Theta(s) x^{-s} for a Fox-H spec, vectorised over complex s"""

    def __init__(self, spec: FoxHSpec):
        self.spec = spec
        a = np.array(spec.a_params, dtype=float).reshape(-1, 2)
        b = np.array(spec.b_params, dtype=float).reshape(-1, 2)
        self.num_b, self.den_b = b[:spec.m], b[spec.m:]
        self.num_a, self.den_a = a[:spec.n], a[spec.n:]
        self.log_x = spec.log_x

    def gap(self):
        lo = max((-v / s for v, s in self.num_b), default=-math.inf)
        hi = min(((1 - v) / s for v, s in self.num_a), default=math.inf)
        return lo, hi

    def decay_rate(self):
        """Exponential decay rate of |Theta(c + it)| as |t| grows"""
        total = self.num_b[:, 1].sum() + self.num_a[:, 1].sum() - self.den_b[:, 1].sum() - self.den_a[:, 1].sum()
        return math.pi / 2 * total

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)[..., None]
        out = np.zeros(s.shape[:-1], dtype=complex)
        zero = np.zeros(s.shape[:-1], dtype=bool)
        if len(self.num_b):
            out += special.loggamma(self.num_b[:, 0] + self.num_b[:, 1] * s).sum(-1)
        if len(self.num_a):
            out += special.loggamma(1 - self.num_a[:, 0] - self.num_a[:, 1] * s).sum(-1)
        for params, arg in ((self.den_b, lambda v, w: 1 - v - w * s), (self.den_a, lambda v, w: v + w * s)):
            if len(params):
                z = arg(params[:, 0], params[:, 1])
                at_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
                zero |= at_pole.any(-1)
                out -= np.where(at_pole, 0, special.loggamma(np.where(at_pole, 1, z))).sum(-1)
        out -= s[..., 0] * self.log_x
        # 1/Gamma vanishes at its poles
        return np.where(zero, complex(-np.inf, 0), out)


def _place_contour(kernel: _MellinBarnesKernel, cfg: ContourConfig) -> float:
    lo, hi = kernel.gap()
    if not lo < hi:
        raise ContourPlacementError(spec=kernel.spec, lo=lo, hi=hi)
    if cfg.shift is not None:
        if not lo < cfg.shift < hi:
            raise ContourPlacementError(spec=kernel.spec, lo=lo, hi=hi)
        return cfg.shift

    def height(c):
        v = kernel(c).real
        return float(v) if np.isfinite(v) else 1e300

    # search window inside the gap; an open side is widened while the integrand keeps shrinking
    if math.isfinite(lo) and math.isfinite(hi):
        margin = 0.02 * (hi - lo)
        left, right = lo + margin, hi - margin
        fallback = (lo + hi) / 2
    else:
        anchor, direction = (lo, 1.0) if math.isfinite(lo) else (hi, -1.0)
        width = 1.0
        while width < 64 and height(anchor + direction * 2 * width) < height(anchor + direction * width):
            width *= 2
        edge = anchor + direction * 0.01
        far = anchor + direction * 2 * width
        left, right = min(edge, far), max(edge, far)
        fallback = anchor + direction * 0.5

    try:
        res = minimize_scalar(height, bounds=(left, right), method="bounded", options=dict(xatol=1e-3))
        if res.success and np.isfinite(res.fun):
            return float(res.x)
    except (ValueError, FloatingPointError):
        pass
    logger.debug(f"saddle search failed for {kernel.spec}, using {fallback}")
    return fallback


def _mellin_barnes(spec: FoxHSpec, cfg: ContourConfig, log_floor: float = -math.inf) -> Tuple[float, float]:
    """
    Returns (sign, log|value|) of the H function, so callers can fold in large
    prefactors before the single final exponentiation.
    When a bound on log|value| already lies below log_floor the result is reported
    as zero without refining the quadrature.
    """
    kernel = _MellinBarnesKernel(spec)
    if kernel.decay_rate() <= 0:
        raise DecayCheckFailed(spec=spec, shift=None, height=math.inf)
    c = _place_contour(kernel, cfg)

    # extend the truncation height until the integrand has decayed below rtol * 1e-3 of its peak
    threshold = math.log(cfg.rtol * 1e-3)
    height = cfg.half_height
    while True:
        t = np.linspace(0.0, height, cfg.nodes + 1)
        logs = kernel(c + 1j * t)
        peak = np.max(logs.real)
        if not np.isfinite(peak):
            raise DecayCheckFailed(spec=spec, shift=c, height=height)
        if logs[-1].real - peak < threshold:
            break
        height *= 2
        if height > cfg.max_height:
            raise DecayCheckFailed(spec=spec, shift=c, height=height)

    scale = peak
    step = height / cfg.nodes
    bound = scale + math.log(step / math.pi * np.exp(logs.real - scale).sum())
    if bound + UNDERFLOW_MARGIN < log_floor:
        logger.debug(f"{spec}: below the representable range (log bound {bound:.4g})")
        return 0.0, -math.inf

    def trapezoid(logs_all, h):
        f = np.exp(logs_all - scale).real
        f[0] *= 0.5  # t = 0 node carries half weight
        return h / math.pi * f.sum(), h / math.pi * np.abs(f).sum()

    estimate, _ = trapezoid(logs, step)
    eps_floor = 64 * np.finfo(float).eps
    for refinement in range(1, cfg.max_refinements + 1):
        step /= 2
        t_new = np.arange(1, 2 * cfg.nodes * 2 ** (refinement - 1), 2) * step
        logs = np.concatenate([logs, kernel(c + 1j * t_new)])
        new_estimate, magnitude = trapezoid(logs, step)
        change = abs(new_estimate - estimate)
        estimate = new_estimate
        if change <= max(cfg.rtol * abs(estimate), eps_floor * magnitude):
            logger.debug(f"{spec}: converged at c={c:.4g}, T={height:g}, {len(logs)} nodes")
            break
    else:
        raise NonConvergence(what=f"contour integral of {spec}", iterations=cfg.max_refinements,
                             change=change, target=cfg.rtol * abs(estimate))

    if estimate == 0:
        return 0.0, -math.inf
    return math.copysign(1.0, estimate), scale + math.log(abs(estimate))


def log_fox_h(spec: FoxHSpec, cfg: Optional[ContourConfig] = None) -> Tuple[float, float]:
    return _mellin_barnes(spec, cfg or ContourConfig())


def log_meijer_g(spec: MeijerGSpec, cfg: Optional[ContourConfig] = None) -> Tuple[float, float]:
    return _mellin_barnes(spec.to_fox(), cfg or ContourConfig())


def _underflow_floor(log_prefactor: float) -> float:
    return LOG_SMALLEST_DOUBLE - log_prefactor


def fox_h(spec: FoxHSpec, cfg: Optional[ContourConfig] = None, log_prefactor: float = 0.0) -> float:
    """exp(log_prefactor) * H(spec)"""
    sign, log_abs = _mellin_barnes(spec, cfg or ContourConfig(), _underflow_floor(log_prefactor))
    return sign * math.exp(log_prefactor + log_abs) if sign else 0.0


def meijer_g(spec: MeijerGSpec, cfg: Optional[ContourConfig] = None, log_prefactor: float = 0.0) -> float:
    """exp(log_prefactor) * G(spec)"""
    sign, log_abs = _mellin_barnes(spec.to_fox(), cfg or ContourConfig(), _underflow_floor(log_prefactor))
    return sign * math.exp(log_prefactor + log_abs) if sign else 0.0


def meijer_g_from(m: int, n: int, a_params: Sequence[float], b_params: Sequence[float], x: float,
                  cfg: Optional[ContourConfig] = None, log_prefactor: float = 0.0) -> float:
    return meijer_g(MeijerGSpec(m, n, tuple(a_params), tuple(b_params), x), cfg, log_prefactor)


def fox_h_from(m: int, n: int, a_params, b_params, x: float,
               cfg: Optional[ContourConfig] = None, log_prefactor: float = 0.0) -> float:
    return fox_h(FoxHSpec(m, n, tuple(a_params), tuple(b_params), x), cfg, log_prefactor)
