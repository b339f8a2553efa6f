"""Command-line driver: ``lgme {fig1,fig2,fig3,fig4,compute,validate}``.

Exit codes: 0 success, 2 validation failure, 3 convergence failure, 64 bad usage.
"""

import argparse
import sys
from pathlib import Path

from . import svg, sweeps, validate
from .fock import DEFAULT_EPSILON
from .measurement import DEFAULT_RESIDUAL_CAP

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_USAGE = 0, 2, 3, 64
FIGURE_DEFAULT_GRID = {"fig1": sweeps.DEFAULT_LAMBDA_GRID, "compute": (0.5,),
                       "fig2": (0.5,), "fig3": (0.5,), "fig4": (0.5,)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _pair(text):
    values = _int_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"a pair needs two modes, got {text!r}")
    return values


def parse_photon_spec(text):
    """``add:1,0,1,0`` or ``sub:0,2,0,0`` -> (kind, counts)."""
    kind, _, counts = text.partition(":")
    kind = {"add": "add", "sub": "subtract", "subtract": "subtract"}.get(kind)
    if kind is None:
        raise argparse.ArgumentTypeError(f"photon spec must start with add: or sub:, got {text!r}")
    values = _int_list(counts)
    if len(values) != 4 or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("photon spec needs four nonnegative counts")
    return kind, values


def build_parser():
    parser = _Parser(prog="lgme", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sweep_args(p, experiment):
        p.add_argument("--lambda-grid", type=_float_list, default=None,
                       help="comma-separated tanh r values (default depends on experiment)")
        p.add_argument("--measured-mode", type=int, default=4)
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="Fock truncation tail tolerance")
        p.add_argument("--residual-cap", type=float, default=DEFAULT_RESIDUAL_CAP)
        p.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")
        p.add_argument("--svg", type=Path, default=None, help="also write an SVG line chart")
        p.add_argument("--timings", action="store_true", help="add a wall_time column (breaks byte-identity)")
        p.set_defaults(experiment=experiment)

    p = sub.add_parser("fig1", help="Gaussian vs photon-counting LGME of the FMSV state")
    sweep_args(p, "fig1")
    p = sub.add_parser("fig2", help="LGME vs photons added/subtracted on one mode")
    sweep_args(p, "fig2")
    p.add_argument("--modes", type=_int_list, default=(1, 2, 4))
    p.add_argument("--photons", type=int, default=4, help="largest photon number m")
    for name, helptext in (("fig3", "LGME along m_i + m_j = total"), ("fig4", "LGME with m_i = m_j")):
        p = sub.add_parser(name, help=helptext)
        sweep_args(p, name)
        p.add_argument("--pair", type=_pair, action="append", default=None,
                       help="mode pair i,j (repeatable; default 1,3 1,2 2,4)")
        if name == "fig3":
            p.add_argument("--total", type=int, default=6, help="photons shared by the pair")
        else:
            p.add_argument("--photons", type=int, default=4, help="largest per-mode photon number")
    p = sub.add_parser("compute", help="LGME of one photon configuration per lambda")
    sweep_args(p, "compute")
    p.add_argument("--photons", type=parse_photon_spec, default=None,
                   help="add:m1,m2,m3,m4 or sub:m1,m2,m3,m4 (default: plain FMSV)")

    p = sub.add_parser("validate", help="run every invariant suite")
    p.add_argument("--suite", action="append", default=None, choices=sorted(validate.SUITES))
    p.add_argument("--mutate", choices=sorted(validate.MUTATIONS), default=None,
                   help="corrupt a builder to check that the suites catch it")
    return parser


def _config(args):
    kwargs = dict(
        experiment=args.experiment,
        lambda_grid=args.lambda_grid or FIGURE_DEFAULT_GRID[args.experiment],
        measured_mode=args.measured_mode,
        epsilon=args.epsilon,
        residual_cap=args.residual_cap,
        timings=args.timings,
    )
    if args.experiment == "fig2":
        kwargs.update(modes=args.modes, photons=args.photons)
    elif args.experiment in ("fig3", "fig4"):
        if args.pair:
            kwargs["pairs"] = tuple(args.pair)
        if args.experiment == "fig3":
            kwargs["total"] = args.total
        else:
            kwargs["photons"] = args.photons
    elif args.experiment == "compute" and args.photons:
        kwargs["photon_spec"] = args.photons
    if not 0 < args.residual_cap < 1 or args.epsilon <= 0:
        raise UsageError("need 0 < residual-cap < 1 and epsilon > 0")
    try:
        return sweeps.SweepConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc))


def run_sweep(args) -> int:
    config = _config(args)
    log_stream = sys.stdout if args.out else sys.stderr

    def progress(line):
        print(line, file=log_stream, flush=True)

    result = sweeps.RUNNERS[config.experiment](config, progress=progress)
    text = sweeps.to_csv(result)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        args.svg.write_text(svg.render(result))
    if result.convergence_failures:
        print(f"[{config.experiment}] {result.convergence_failures} row(s) did not converge", file=sys.stderr)
    if result.check_failures:
        print(f"[{config.experiment}] {result.check_failures} row(s) failed their check", file=sys.stderr)
    return result.exit_code


def run_validate(args) -> int:
    with validate.mutated(args.mutate):
        reports = validate.run_suites(args.suite)
    print(validate.format_report(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return run_validate(args)
        return run_sweep(args)
    except UsageError as exc:
        print(f"lgme: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
