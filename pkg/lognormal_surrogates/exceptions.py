from easypy.exceptions import TException


class LnsError(TException):
    template = "lognormal-surrogates error"
    exit_code = 1


# exit code 1: bad input or configuration

class ParameterError(LnsError):
    template = "Invalid parameter {name}={value!r}: {reason}"
    exit_code = 1


class DomainError(ParameterError):
    template = "{func} is undefined for {arg}={value!r} ({reason})"


class PoleError(DomainError):
    template = "{func} has a pole at {arg}={value!r}"


class SingularMomentOrders(ParameterError):
    template = "Moment orders must differ, got k1=k2={k}"


class CascadeFileError(ParameterError):
    template = "Invalid cascade description {path}: {reason}"


class UnknownScenario(ParameterError):
    template = "Unknown scenario {name!r} (use {choices})"


class UsageError(ParameterError):
    template = "{detail}"


# exit code 2: no surrogate exists for the requested target

class InfeasibilityError(LnsError):
    template = "Infeasible request"
    exit_code = 2


class InfeasibleTarget(InfeasibilityError):
    template = (
        "No {family} product with N={n} matches sigma={sigma}: "
        "requires sigma^2 < {bound} (use N >= {n_min})"
    )


# exit code 3: numerical machinery failed

class NonConvergenceError(LnsError):
    template = "Numerical evaluation failed"
    exit_code = 3


class ContourPlacementError(NonConvergenceError):
    template = "No vertical contour separates the pole families of {spec} (left bound {lo}, right bound {hi})"


class DecayCheckFailed(NonConvergenceError):
    template = "Mellin-Barnes integrand of {spec} does not decay along Re(s)={shift} (height {height})"


class NonConvergence(NonConvergenceError):
    template = "{what} did not converge after {iterations} refinements (last change {change}, target {target})"


class EvaluationFailed(NonConvergenceError):
    template = "Evaluating {what} at {where} failed: {cause}"


class SeriesDivergence(NonConvergenceError):
    template = "Series {what} did not reach tolerance within {terms} terms"


class BesselOverflow(NonConvergenceError):
    template = "bessel_i({order}, {x}) overflows (argument above {limit}); use log_bessel_i"


class MomentOverflow(NonConvergenceError):
    template = "Product of moments of order {k} is not finite; retry with a smaller order"


class AliasingError(NonConvergenceError):
    template = "Log-grid loses {mass} of probability mass for factor {index} (limit {limit})"


class InvalidSurrogate(NonConvergenceError):
    template = "Surrogate residuals {residuals} exceed tolerance {tolerance}"


def exit_code(exc):
    """CLI exit code for an exception raised by the library"""
    return getattr(exc, "exit_code", 1)
