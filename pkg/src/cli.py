"""Command-line interface: simulations, exact oracles, limits and figure data."""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.experiments.config import ExperimentConfig
from src.experiments.figures import FIGURES, SWEEP_COLUMNS, build_figure, write_svg
from src.experiments.montecarlo import SweepAxis, estimate_pe, exact_bound_or_none, sweep
from src.models.asymptotics import (
    CRITICAL_THETA,
    BoundMethod,
    c_p,
    error_exponent_lb,
    f_max,
    hoeffding_bound,
    limit_for,
    q_functional,
)
from src.models.exact import exact_error_prob
from src.models.graph import GraphFamily
from src.models.ising import Coupling
from src.shared.exceptions import ConfigurationError, IsingVoteError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(records: List[Dict[str, Any]], columns: Sequence[str], fmt: str) -> str:
    """Render records as CSV (empty cells for None) or a JSON array."""
    if fmt == "json":
        return json.dumps([{c: r.get(c) for c in columns} for r in records], indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([_format_cell(record.get(c)) for c in columns])
    return buffer.getvalue()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _add_model_flags(parser: argparse.ArgumentParser, trials: bool = True) -> None:
    parser.add_argument("--config", help="JSON file with experiment fields; flags override it")
    parser.add_argument("--graph", help="empty | chain | chain-pbc | complete | custom:PATH")
    parser.add_argument("--n", type=int, help="number of members (odd)")
    parser.add_argument("--theta", type=float, help="inverse temperature")
    parser.add_argument("--p", type=float, help="crossover probability in (0, 1/2)")
    parser.add_argument("--coupling", choices=[c.value for c in Coupling], help="coupling convention")
    if trials:
        parser.add_argument("--trials", type=int, help="Monte Carlo trials")
        parser.add_argument("--seed", type=int, help="64-bit master seed")
        parser.add_argument("--confidence", type=float, help="confidence level (default 0.99)")
        parser.add_argument("--burn-in", dest="burn_in_sweeps", type=int, help="Glauber burn-in sweeps")
        parser.add_argument("--thinning", dest="thinning_sweeps", type=int, help="Glauber sweeps between draws")


def _config_from_args(args: argparse.Namespace, **extra: Any) -> ExperimentConfig:
    fields = ["graph", "n", "theta", "p", "coupling", "trials", "seed", "confidence",
              "burn_in_sweeps", "thinning_sweeps"]
    overrides = {f: getattr(args, f, None) for f in fields}
    overrides.update(extra)
    if args.config:
        return ExperimentConfig.from_json_file(args.config, overrides)
    return ExperimentConfig.model_validate({k: v for k, v in overrides.items() if v is not None})


def _simulation_record(config: ExperimentConfig, workers: Optional[int]) -> Dict[str, Any]:
    estimate = estimate_pe(config, workers)
    if estimate.approximate:
        logger.warning(f"{config.graph} uses Glauber dynamics; the estimate is approximate")
    return {
        "graph": config.graph,
        "n": config.n,
        "theta": config.theta,
        "p": config.p,
        "trials": config.trials,
        "seed": config.seed,
        "pe_hat": estimate.point,
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "limit": limit_for(config.family, config.resolved_coupling, config.theta, config.p),
        "bound": exact_bound_or_none(config),
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _emit(render([_simulation_record(config, args.workers)], SWEEP_COLUMNS, args.format), args.output)
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    config = _config_from_args(args, trials=1)
    model = config.build_model()
    record = {
        "graph": config.graph,
        "n": config.n,
        "theta": config.theta,
        "p": config.p,
        "pe_exact": exact_error_prob(model, config.p),
        "bound": hoeffding_bound(model, config.p, method=BoundMethod.EXACT),
        "q_functional": q_functional(model, config.p),
    }
    _emit(render([record], list(record), args.format), args.output)
    return EXIT_OK


def cmd_limit(args: argparse.Namespace) -> int:
    family, _ = GraphFamily.parse(args.graph)
    coupling = Coupling(args.coupling) if args.coupling else (
        Coupling.CURIE_WEISS if family is GraphFamily.COMPLETE else Coupling.EDGEWISE
    )
    if family is not GraphFamily.EMPTY and args.theta is None:
        raise ConfigurationError(f"graph '{family.value}' needs --theta")
    c_p(args.p)  # validates p

    if family is GraphFamily.COMPLETE and coupling is Coupling.CURIE_WEISS and args.theta > CRITICAL_THETA:
        quantity, value = "error_exponent_lb", error_exponent_lb(args.theta, args.p)
    else:
        value = limit_for(family, coupling, args.theta, args.p)
        if value is None:
            raise ConfigurationError(f"no closed-form limit for {args.graph} with theta={args.theta}")
        quantity = "pe_limit"
    record = {"graph": args.graph, "theta": args.theta, "p": args.p, "quantity": quantity, "value": value}
    _emit(render([record], list(record), args.format), args.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    axis = SweepAxis(args.axis)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    placeholder = {axis.value: values[0]} if values else {}
    base = _config_from_args(args, **placeholder)
    rows = sweep(base, axis, values, workers=args.workers)
    _emit(render([r.as_record() for r in rows], SWEEP_COLUMNS, args.format), args.output)
    return EXIT_OK


def cmd_exponent(args: argparse.Namespace) -> int:
    cp = c_p(args.p)
    record = {
        "theta": args.theta,
        "p": args.p,
        "c_p": cp,
        "f_max_theta": f_max(args.theta)[0],
        "f_max_theta_minus_cp": f_max(args.theta - cp)[0] if args.theta > cp else 0.0,
        "bound": error_exponent_lb(args.theta, args.p),
    }
    _emit(render([record], list(record), args.format), args.output)
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    figure = build_figure(args.name, trials=args.trials, seed=args.seed, workers=args.workers)
    _emit(render(figure.records, figure.columns, args.format), args.output)
    if args.svg:
        write_svg(figure, Path(args.svg))
    return EXIT_OK


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for all subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")
    common.add_argument("--output", help="write results to this file instead of stdout")
    common.add_argument("--workers", type=_positive_int, help="worker processes (default ISINGVOTE_WORKERS)")
    common.add_argument("--log-level", help="override ISINGVOTE_LOG_LEVEL")

    parser = argparse.ArgumentParser(
        prog="isingvote",
        description="Majority sentiment detection over Ising-prior networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of P_e")
    _add_model_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    exact = sub.add_parser("exact", parents=[common], help="exact P_e, Hoeffding bound and Q-functional")
    _add_model_flags(exact, trials=False)
    exact.set_defaults(handler=cmd_exact, trials=None, seed=None, confidence=None,
                       burn_in_sweeps=None, thinning_sweeps=None)

    limit = sub.add_parser("limit", parents=[common], help="asymptotic P_e or error exponent bound")
    limit.add_argument("--graph", required=True)
    limit.add_argument("--p", type=float, required=True)
    limit.add_argument("--theta", type=float)
    limit.add_argument("--coupling", choices=[c.value for c in Coupling])
    limit.set_defaults(handler=cmd_limit)

    sweep_parser = sub.add_parser("sweep", parents=[common], help="P_e along one parameter axis")
    _add_model_flags(sweep_parser)
    sweep_parser.add_argument("--axis", choices=[a.value for a in SweepAxis], required=True)
    sweep_parser.add_argument("--values", required=True, help="comma-separated values")
    sweep_parser.set_defaults(handler=cmd_sweep)

    exponent = sub.add_parser("exponent", parents=[common], help="Curie-Weiss error exponent lower bound")
    exponent.add_argument("--theta", type=float, required=True)
    exponent.add_argument("--p", type=float, required=True)
    exponent.set_defaults(handler=cmd_exponent)

    figure = sub.add_parser("figure", parents=[common], help="write figure data")
    figure.add_argument("name", choices=list(FIGURES))
    figure.add_argument("--trials", type=_positive_int, default=20_000)
    figure.add_argument("--seed", type=int, default=0)
    figure.add_argument("--svg", help="also write an SVG line plot (needs the plot extra)")
    figure.set_defaults(handler=cmd_figure)

    return parser


def _one_line(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "config"
    return f"{location}: {first.get('msg', str(error))}"


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and dispatch a subcommand.

    Returns:
        int: 0 on success, 2 on invalid flags or configuration, 1 on runtime failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    if args.log_level:
        logging.getLogger("src").setLevel(args.log_level.upper())

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ValidationError as e:
        message = _one_line(e)
    except ConfigurationError as e:
        message = str(e)
    except IsingVoteError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE
