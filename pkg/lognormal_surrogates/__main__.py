import sys
import argparse
from easypy.bunch import Bunch


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1, like every other configuration error"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common():
    common = _Parser(add_help=False)
    common.add_argument("--format", default="json", choices=["json", "csv"], help="Output format")
    common.add_argument("--out", help="Write output to this file instead of stdout")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (default: LNS_SEED)")
    common.add_argument("--tol", type=float, help="Quadrature and contour tolerance (default: LNS_TOLERANCE)")
    common.add_argument("--log-level", help="Logging level (default: LNS_LOG_LEVEL)")
    return common


def _target(parser):
    parser.add_argument("--nu", type=float, required=True, help="Lognormal log-mean")
    parser.add_argument("--sigma", type=float, required=True, help="Lognormal log-standard-deviation")
    parser.add_argument("--n-factors", type=int, default=5, help="Number of surrogate factors N")


def build_parser():
    parser = _Parser(prog="lognormal_surrogates", description="Lognormal fading surrogates")
    parser.set_defaults(func=lambda *_, **__: parser.print_help())
    common = _common()

    subparsers = parser.add_subparsers()

    fwd = subparsers.add_parser("map-forward", parents=[common],
                                help="Solve the product surrogate of a Lognormal target")
    _target(fwd)
    fwd.add_argument("--family", default="nakagami-product",
                     help="nakagami-product (nak) or inv-nakagami-product (inv)")
    fwd.set_defaults(func=_map_forward)

    rev = subparsers.add_parser("map-reverse", parents=[common],
                                help="Lognormal parameters of a cascade of fading hops")
    rev.add_argument("cascade", help="JSON cascade description")
    rev.add_argument("--k", type=float, help="kappa-mu moment order (default 1/L)")
    rev.add_argument("--k1", type=float, help="first eta-mu moment order (default 1/L)")
    rev.add_argument("--k2", type=float, help="second eta-mu moment order (default 2/L)")
    rev.add_argument("--eta-mu-format", help="format1 or format2 (default: LNS_ETA_MU_FORMAT)")
    rev.add_argument("--kappa-mu-method", default="moments", help="moments or quadrature")
    rev.set_defaults(func=_map_reverse)

    from .cli import QUANTITIES, MODELS
    ev = subparsers.add_parser("eval", parents=[common], help="Tabulate a statistic on a grid")
    ev.add_argument("quantity", choices=QUANTITIES)
    _target(ev)
    ev.add_argument("--model", action="append", choices=MODELS, help="Column to include (repeatable, default all)")
    ev.add_argument("--p-mix", type=float, default=0.5, help="Mixture weight of the Nakagami product")
    ev.add_argument("--gamma-bar", type=float, help="Single mean SNR for ber/capacity, instead of --grid")
    ev.add_argument("--a", type=float, default=1.0, help="BER constant a")
    ev.add_argument("--b", type=float, default=1.0, help="BER constant b")
    ev.add_argument("--bandwidth", type=float, default=1.0, help="Bandwidth B for capacity")
    ev.add_argument("--grid", help="lo:hi:n:lin|log (abscissa is r, omega or gamma_bar depending on quantity)")
    ev.add_argument("--alpha", type=float, help="alpha of the composite multipath")
    ev.add_argument("--mu", type=float, help="mu of the composite multipath")
    ev.add_argument("--omega-r", type=float, default=1.0, help="Multipath mean power of the composite")
    ev.set_defaults(func=_eval)

    val = subparsers.add_parser("validate", parents=[common], help="Run validation scenarios")
    val.add_argument("scenarios", nargs="*", help="Scenario names or 'all' (default)")
    val.add_argument("--timings", action="store_true", help="Include wall-clock timings in the report")
    val.add_argument("--mc-samples", type=int, help="Monte Carlo samples (default: LNS_MC_SAMPLES)")
    val.set_defaults(func=_validate)

    info_parse = subparsers.add_parser("info", help="Print version and configuration defaults")
    info_parse.add_argument("--output", default="json", choices=["json", "yaml"], help="Output format")
    info_parse.set_defaults(func=_info)

    test_parse = subparsers.add_parser("test", help="Start unit tests")
    test_parse.set_defaults(func=_test)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv, namespace=Bunch())
    func = args.pop("func")

    from .configuration import CONF
    from .exceptions import LnsError, exit_code
    from .logging import init_logging, logger
    init_logging(args.get("log_level") or CONF.log_level)

    try:
        code = func(args)
    except LnsError as exc:
        logger.error(exc.render(color=False))
        code = exit_code(exc)
    sys.exit(code or 0)


def _map_forward(args):
    from .cli import cmd_map_forward
    return cmd_map_forward(args)


def _map_reverse(args):
    from .cli import cmd_map_reverse
    return cmd_map_reverse(args)


def _eval(args):
    from .cli import cmd_eval
    return cmd_eval(args)


def _validate(args):
    from .cli import cmd_validate
    return cmd_validate(args)


def _info(args):
    from .configuration import CONF
    info = dict(name=CONF.name, version=CONF.version, defaults=CONF.defaults)
    if args.output == "yaml":
        import yaml
        yaml.safe_dump(info, sys.stdout, default_flow_style=False)
    elif args.output == "json":
        import json
        json.dump(info, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        assert False, f"invalid output format: {args.output}"


def _test(args):
    """Runs the tests without code coverage"""
    import pytest
    sys.exit(pytest.main(["-x", "tests", "-v"]))


if __name__ == '__main__':
    main()
