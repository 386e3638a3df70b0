import math
from contextlib import contextmanager
from functools import wraps

import numpy as np
from scipy.integrate import quad

from easypy.tokens import Token

from .configuration import CONF
from .exceptions import ParameterError, NonConvergenceError, EvaluationFailed
from .logging import capture_integration_warnings


def parse_token(value: str, allowed, what: str):
    """Convert a user string such as 'inv-nakagami' to its Token representation."""
    token = Token(value.strip().upper().replace("-", "_"))
    if token not in allowed:
        choices = "|".join(sorted(token_label(t) for t in allowed))
        raise ParameterError(name=what, value=value, reason=f"use one of {choices}")
    return token


def token_label(token) -> str:
    """'<INV_NAKAGAMI_PRODUCT>' -> 'inv-nakagami-product'"""
    return str(token).strip("<>").lower().replace("_", "-")


def require(condition: bool, name: str, value, reason: str):
    if not condition:
        raise ParameterError(name=name, value=value, reason=reason)


def elementwise(func):
    """
    Lift a scalar function of (params, r) to numpy arrays of r.
    Scalars stay scalars.
    """

    @wraps(func)
    def wrapper(params, r, *args, **kwargs):
        if np.ndim(r) == 0:
            return func(params, float(r), *args, **kwargs)
        r = np.asarray(r, dtype=float)
        out = np.empty(r.shape, dtype=float)
        for idx, value in np.ndenumerate(r):
            out[idx] = func(params, float(value), *args, **kwargs)
        return out

    return wrapper


def integrate_log_domain(func, center: float, epsrel: float = None, epsabs: float = 1e-14, limit: int = 200,
                         what: str = "quadrature"):
    """
    Integral of func(r) over r in (0, inf), computed as the integral of func(e^y) e^y
    over the real line, split at y = log(center).

    Densities of positive variates have a single interior peak and algebraic or
    exponential tails in r, which become exponential tails in y.
    """
    epsrel = CONF.tolerance if epsrel is None else epsrel
    split = math.log(center)

    def integrand(y):
        if not -700 < y < 700:
            return 0.0
        r = math.exp(y)
        try:
            value = func(r) * r
        except OverflowError:
            return 0.0
        # tails beyond what a double can represent contribute nothing
        return value if math.isfinite(value) else 0.0

    total = 0.0
    with capture_integration_warnings(what):
        for lo, hi in ((-np.inf, split), (split, np.inf)):
            value, _ = quad(integrand, lo, hi, epsrel=epsrel, epsabs=epsabs, limit=limit)
            total += value
    return total


def pairwise_reduce(items, combine):
    """
    Fold a sequence as a balanced binary tree: neighbours are combined level by level,
    so the result depends only on the order of the items and rounding grows with log(len).
    """
    items = list(items)
    require(len(items) > 0, "items", items, "needs at least one element")
    while len(items) > 1:
        paired = [combine(a, b) for a, b in zip(items[0::2], items[1::2])]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


@contextmanager
def evaluation_context(what: str, where):
    """Re-raise numerical failures with the quantity and abscissa being evaluated"""
    try:
        yield
    except EvaluationFailed:
        raise
    except NonConvergenceError as exc:
        raise EvaluationFailed(what=what, where=where, cause=exc.__class__.__name__) from exc
