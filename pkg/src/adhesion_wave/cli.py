"""Command line entry point ``adhesion-wave``.

Every subcommand builds an :class:`~adhesion_wave.config.ExperimentSpec`
and hands it to :func:`~adhesion_wave.experiments.run_experiment`, so the
CLI and JSON experiment files share one code path.

Exit status: 0 on success, 1 if a verify check failed, 2 on invalid input,
3 on a numerical or IO failure.
"""

import argparse
import logging
import sys

from .config import ExperimentSpec, OdeSettings, OdeVerifySettings, TableSettings, load_json, parse_config, parse_run_config
from .errors import AdhesionWaveError, ConfigError, ParameterError, PreconditionError
from .experiments import run_experiment
from .ode import OdeParams
from .potential import PotentialParams

__all__ = ["build_parser", "main"]


def _sigmas(text):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common():
    # SUPPRESS keeps a subcommand from overwriting a flag given before it
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for all artifacts")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                   help="only print warnings and errors")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="adhesion-wave",
        description="Damped wave equation with an adhesion potential: solver, "
        "hybrid ODE model and verification experiments.",
    )
    parser.add_argument("--out-dir", default=".", help="directory for all artifacts")
    parser.add_argument("--quiet", action="store_true", help="only print warnings and errors")
    top = parser.add_subparsers(dest="group", required=True)

    pot = top.add_parser("potential", help="adhesion potential utilities")
    pot_sub = pot.add_subparsers(dest="command", required=True)
    tb = pot_sub.add_parser("table", parents=[common], help="tabulate phi and phi'")
    tb.add_argument("--u-star", type=float, required=True)
    tb.add_argument("--sigma", type=float, required=True)
    tb.add_argument("--from", dest="start", type=float, required=True)
    tb.add_argument("--to", dest="stop", type=float, required=True)
    tb.add_argument("--step", type=float, required=True)
    tb.add_argument("--out", default="potential.csv")

    ode = top.add_parser("ode", help="hybrid scalar ODE")
    ode_sub = ode.add_subparsers(dest="command", required=True)
    orun = ode_sub.add_parser("run", parents=[common], help="exact piecewise solution to CSV")
    orun.add_argument("--z0", type=float, required=True)
    orun.add_argument("--w0", type=float, required=True)
    orun.add_argument("--sigma", type=float, required=True)
    orun.add_argument("--t-max", type=float, default=30.0)
    orun.add_argument("--dt", type=float, default=0.01, help="output sampling step")
    orun.add_argument("--out", default="trajectory.csv")
    over = ode_sub.add_parser("verify", parents=[common], help="uniform decay constants M(sigma)")
    over.add_argument("--battery", default="default", help="'default' or a JSON file of [z0, w0] pairs")
    over.add_argument("--sigmas", type=_sigmas, default=(10.0, 100.0, 1000.0, 10000.0))
    over.add_argument("--t-max", type=float, default=30.0)
    over.add_argument("--out", default="report.json")

    pde = top.add_parser("pde", help="PDE runs and checks from a RunConfig JSON file")
    pde_sub = pde.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "simulate and write the ledger, snapshots and summary"),
        ("verify-energy", "energy and J balance convergence study"),
        ("decay", "exponential rate fit of the deviation"),
        ("linear-decay", "decay of the linear homogeneous problem"),
    ):
        sp = pde_sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--config", required=True, help="RunConfig JSON file")
        if name == "verify-energy":
            sp.add_argument("--levels", type=int, default=2, help="refinement levels (1-4)")
            sp.add_argument("--jobs", type=int, default=1, help="parallel runs")

    exp = top.add_parser("experiment", parents=[common], help="run an experiment JSON file")
    exp.add_argument("--config", required=True)
    exp.add_argument("--jobs", type=int, default=1)
    return parser


def _spec_from_args(args):
    out_dir = args.out_dir
    if args.group == "experiment":
        doc = load_json(args.config)
        if "out_dir" not in doc:
            doc = dict(doc, out_dir=out_dir)
        return parse_config(doc)
    if args.group == "potential":
        try:
            PotentialParams(args.u_star, args.sigma)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        table = TableSettings(args.u_star, args.sigma, args.start, args.stop, args.step)
        return ExperimentSpec("potential-table", table=table, out_dir=out_dir, outputs={"table": args.out})
    if args.group == "ode":
        if args.command == "run":
            OdeParams(args.sigma)
            ode = OdeSettings(args.z0, args.w0, args.sigma, args.t_max, args.dt)
            return ExperimentSpec("ode-run", ode=ode, out_dir=out_dir, outputs={"csv": args.out})
        battery = "default"
        if args.battery != "default":
            battery = tuple(tuple(float(x) for x in b) for b in load_json(args.battery))
        for s in args.sigmas:
            OdeParams(s)
        verify = OdeVerifySettings(battery, args.sigmas, args.t_max)
        return ExperimentSpec("ode-verify", ode_verify=verify, out_dir=out_dir, outputs={"report": args.out})
    run = parse_run_config(load_json(args.config))
    kind = "pde-" + args.command
    return ExperimentSpec(kind, run=run, out_dir=out_dir, levels=getattr(args, "levels", 2))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        spec = _spec_from_args(args)
    except (ConfigError, ParameterError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run_experiment(spec, jobs=getattr(args, "jobs", 1))
    except (ConfigError, ParameterError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AdhesionWaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
