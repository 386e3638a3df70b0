"""
Command bodies for `python -m lognormal_surrogates`.

Every command returns an exit code and writes one document (JSON, or CSV with
'# key: value' metadata lines) to --out or stdout.
"""

import csv
import io
import json
import math
import sys
from dataclasses import replace

from plumbum import local

from easypy.tokens import LOGARITHMIC, LINEAR

from .configuration import CONF
from .dists import Lognormal
from .exceptions import UsageError
from .logging import logger
from .mapping import (
    NAKAGAMI_PRODUCT, INV_NAKAGAMI_PRODUCT, SURROGATE_FAMILIES, KAPPA_MU_METHODS,
    CascadeSpec, forward, reverse_cascade_blocks, combine_blocks,
)
from .dists import ETA_MU_FORMATS
from .metrics import (
    LinkParams, CompositeParams, characteristic_function, bit_error_rate, capacity,
    composite_pdf, composite_cdf, composite_pdf_mixture, composite_cdf_mixture,
)
from .oracle import GridSpec, McConfig, cf_quadrature, ber_quadrature, capacity_quadrature, composite_quadrature
from .products import MixtureParams
from .scenarios import ValidationContext, run_scenarios
from .specfun import ContourConfig
from .utils import parse_token, token_label


QUANTITIES = ("pdf", "cdf", "cf", "ber", "capacity", "composite-pdf", "composite-cdf")
MODELS = ("lognormal", "nak", "inv", "mixture")
FAMILY_ALIASES = {"nak": "nakagami-product", "inv": "inv-nakagami-product"}

VALIDATION_FAILED = 3


# ----------------------------------------------------------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------------------------------------------------------


def metadata(args, **extra):
    """Library version and numeric settings, with --seed and --tol applied"""
    meta = dict(name=CONF.name, version=CONF.version, **CONF.defaults)
    if args.get("seed") is not None:
        meta["seed"] = args.seed
    if args.get("tol") is not None:
        meta["contour_tolerance"] = args.tol
    meta.update(extra)
    return meta


def contour_config(args) -> ContourConfig:
    return ContourConfig(rtol=args.tol) if args.get("tol") is not None else ContourConfig()


def _cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render(document: dict, rows: list, fmt: str) -> str:
    """`document` is the JSON payload; `rows` the flat records CSV output is made of"""
    if fmt == "json":
        return json.dumps(document, indent=2, sort_keys=True) + "\n"
    assert fmt == "csv", f"invalid output format: {fmt}"
    buffer = io.StringIO()
    for key, value in sorted(document["metadata"].items()):
        buffer.write(f"# {key}: {value}\n")
    if rows:
        writer = csv.writer(buffer, lineterminator="\n")
        columns = list(dict.fromkeys(key for row in rows for key in row))
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    return buffer.getvalue()


def emit(document: dict, rows: list, args):
    text = render(document, rows, args.format)
    if args.get("out"):
        local.path(args.out).write(text)
        logger.info(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------------------------------------------------
# map-forward / map-reverse
# ----------------------------------------------------------------------------------------------------------------------


def _family(text):
    return parse_token(FAMILY_ALIASES.get(text, text), SURROGATE_FAMILIES, "family")


def cmd_map_forward(args):
    target = Lognormal(args.nu, args.sigma)
    solution = forward(target, args.n_factors, _family(args.family))
    logger.info(f"{token_label(solution.family)}: m={solution.m:.10g}, Omega={solution.omega:.10g}, "
                f"residuals={solution.residuals}")
    document = dict(metadata=metadata(args, command="map-forward", nu=args.nu, sigma=args.sigma),
                    solution=solution.as_dict())
    emit(document, [dict(nu=args.nu, sigma=args.sigma, **solution.as_dict())], args)
    return 0


def cmd_map_reverse(args):
    fmt = parse_token(args.eta_mu_format, ETA_MU_FORMATS, "eta-mu format") if args.get("eta_mu_format") else None
    method = parse_token(args.kappa_mu_method, KAPPA_MU_METHODS, "kappa-mu method")
    spec = CascadeSpec.from_json(args.cascade, eta_mu_format=fmt, kappa_mu_method=method)
    orders = {name: args[name] for name in ("k", "k1", "k2") if args.get(name) is not None}
    if orders:
        spec = replace(spec, **orders)

    blocks = reverse_cascade_blocks(spec)
    total = combine_blocks(blocks)
    rows = [b.as_dict() for b in blocks] + [dict(family="total", hops=len(spec.hops), nu=total.nu, sigma=total.sigma)]
    document = dict(metadata=metadata(args, command="map-reverse", cascade=str(args.cascade)),
                    blocks=rows[:-1], total=rows[-1])
    emit(document, rows, args)
    return 0


# ----------------------------------------------------------------------------------------------------------------------
# eval
# ----------------------------------------------------------------------------------------------------------------------


def _default_grid(quantity, target: Lognormal) -> GridSpec:
    if quantity in ("pdf", "cdf"):
        return GridSpec(math.exp(target.nu - 4 * target.sigma), math.exp(target.nu + 4 * target.sigma), 200,
                        LOGARITHMIC)
    if quantity == "cf":
        return GridSpec(-10.0, 10.0, 201, LINEAR)
    if quantity in ("ber", "capacity"):
        return GridSpec(0.1, 1000.0, 50, LOGARITHMIC)
    scale = math.exp(target.nu / 2)
    return GridSpec(0.02 * scale, 10 * scale, 100, LOGARITHMIC)


class _Evaluator:
    """One column per model; surrogates are solved on first use"""

    def __init__(self, args, target: Lognormal):
        self.args = args
        self.target = target
        self.cfg = contour_config(args)
        self._solutions = {}

    def solution(self, family):
        if family not in self._solutions:
            self._solutions[family] = forward(self.target, self.args.n_factors, family)
        return self._solutions[family]

    def model(self, name):
        if name == "nak":
            return self.solution(NAKAGAMI_PRODUCT).to_product()
        if name == "inv":
            return self.solution(INV_NAKAGAMI_PRODUCT).to_product()
        return MixtureParams(nak=self.model("nak"), inv=self.model("inv"), p=self.args.p_mix)

    def link(self, gamma_bar):
        return LinkParams(gamma_bar=gamma_bar, a=self.args.a, b=self.args.b, bandwidth=self.args.bandwidth)

    def lognormal(self, quantity, x):
        target, center = self.target, math.exp(self.target.nu)
        if quantity == "pdf":
            return target.pdf(x)
        if quantity == "cdf":
            return target.cdf(x)
        if quantity == "cf":
            return complex(1.0) if x == 0 else cf_quadrature(target.pdf, x, center)
        if quantity == "ber":
            return ber_quadrature(target.pdf, target.moment(2), self.link(x), center)
        if quantity == "capacity":
            return capacity_quadrature(target.pdf, target.moment(2), self.link(x), center)
        return composite_quadrature(self.args.alpha, self.args.mu, target, x, self.args.omega_r,
                                    cdf=quantity == "composite-cdf")

    def surrogate(self, name, quantity, x):
        model = self.model(name)
        if quantity == "pdf":
            return float(model.pdf(x, self.cfg))
        if quantity == "cdf":
            return float(model.cdf(x, self.cfg))
        if quantity == "cf":
            return complex(characteristic_function(model, x, self.cfg))
        if quantity == "ber":
            return bit_error_rate(model, self.link(x), self.cfg)
        if quantity == "capacity":
            return capacity(model, self.link(x), self.cfg)
        alpha, mu, omega_r = self.args.alpha, self.args.mu, self.args.omega_r
        if name == "mixture":
            func = composite_cdf_mixture if quantity == "composite-cdf" else composite_pdf_mixture
            return float(func(alpha, mu, model, x, omega_r, self.cfg))
        func = composite_cdf if quantity == "composite-cdf" else composite_pdf
        return float(func(CompositeParams(alpha, mu, shadow=model, omega_r=omega_r), x, self.cfg))

    def value(self, name, quantity, x):
        if name == "lognormal":
            return self.lognormal(quantity, x)
        return self.surrogate(name, quantity, x)


def _abscissa(quantity):
    return {"cf": "omega", "ber": "gamma_bar", "capacity": "gamma_bar"}.get(quantity, "r")


def cmd_eval(args):
    quantity = args.quantity
    models = args.get("model") or list(MODELS)
    if quantity.startswith("composite") and (args.get("alpha") is None or args.get("mu") is None):
        raise UsageError(detail=f"{quantity} needs --alpha and --mu")

    target = Lognormal(args.nu, args.sigma)
    grid = GridSpec.parse(args.grid) if args.get("grid") else _default_grid(quantity, target)
    if quantity != "cf" and grid.lower <= 0:
        raise UsageError(detail=f"{quantity} needs a positive grid, got {grid}")
    abscissae = grid.values()
    if quantity in ("ber", "capacity") and args.get("gamma_bar") is not None and not args.get("grid"):
        abscissae = [args.gamma_bar]

    evaluator = _Evaluator(args, target)
    column = _abscissa(quantity)
    rows = []
    for x in abscissae:
        row = {column: float(x)}
        for name in models:
            value = evaluator.value(name, quantity, float(x))
            if isinstance(value, complex):
                row[f"{name}_re"], row[f"{name}_im"] = value.real, value.imag
            else:
                row[name] = float(value)
        rows.append(row)

    meta = metadata(args, command="eval", quantity=quantity, nu=args.nu, sigma=args.sigma, n_factors=args.n_factors,
                    p_mix=args.p_mix, grid=str(grid) if len(abscissae) > 1 else str(abscissae[0]))
    meta.update({k: args[k] for k in ("alpha", "mu", "omega_r") if quantity.startswith("composite")})
    if quantity in ("ber", "capacity"):
        meta.update(a=args.a, b=args.b, bandwidth=args.bandwidth)
    emit(dict(metadata=meta, rows=rows), rows, args)
    return 0


# ----------------------------------------------------------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------------------------------------------------------


def cmd_validate(args):
    samples = args.get("mc_samples") or CONF.mc_samples
    seed = CONF.seed if args.get("seed") is None else args.seed
    ctx = ValidationContext(mc=McConfig(samples=samples, seed=seed), contour=contour_config(args))
    reports = run_scenarios(args.scenarios or ["all"], ctx, timings=args.timings)
    passed = all(r.passed for r in reports)

    document = dict(metadata=metadata(args, command="validate", mc_samples=samples), passed=passed,
                    reports=[r.as_dict() for r in reports])
    rows = [dict(scenario=r.scenario, **c.as_dict()) for r in reports for c in r.comparisons]
    emit(document, rows, args)
    return 0 if passed else VALIDATION_FAILED
