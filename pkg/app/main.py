import argparse
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import orjson
import pydantic
import yaml

from app import config
from app.constants import ExitCode, NatureMode, Outcome, QueryMode, StrategyKind
from app.engine import run_basic
from app.errors import (
    AssumptionError,
    ConvergenceError,
    ImdpError,
    InputFileError,
    ModelFormatError,
    UnsatisfiableQueryError,
)
from app.formats import (
    dump_model,
    dump_strategy,
    gen_antg,
    gen_grid,
    parse_model,
    parse_query,
    parse_strategy,
    pareto_csv,
    read_document,
)
from app.imdp import validate
from app.models.generator_models import AntgConfig, GridConfig
from app.models.imdp_models import Imdp
from app.models.query_models import BasicQuery, Query
from app.models.strategy_models import MixtureStrategy, NaturePolicy
from app.query import prepare_query
from app.strategy import randomise, simulate, state_action_frequencies
from app.utils.logging import configure_logging, get_logger
from app.utils.message_utils import render_message

logger = get_logger("cli", "application")

STATUS_CODES = {
    Outcome.ACHIEVABLE: ExitCode.SUCCESS,
    Outcome.UNACHIEVABLE: ExitCode.UNACHIEVABLE,
    Outcome.UNDECIDED: ExitCode.UNDECIDED,
}


def _decode(path: str, parser: Callable[[Any], Any]) -> Any:
    """Read a JSON file and parse it, turning every input problem into an InputFileError."""
    try:
        return parser(read_document(path))
    except FileNotFoundError as e:
        raise InputFileError(render_message("format_error", path=path, detail="file not found")) from e
    except orjson.JSONDecodeError as e:
        raise InputFileError(
            render_message("malformed_json", path=path, line=e.lineno, column=e.colno, detail=e.msg)
        ) from e
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "$"
        raise InputFileError(
            render_message("schema_error", path=path, location=location, detail=first["msg"])
        ) from e
    except ModelFormatError as e:
        where = f"{path}:{e.path}" if e.path else path
        raise InputFileError(render_message("format_error", path=where, detail=str(e))) from e


def _emit(payload: bytes | str, out: Optional[str]) -> None:
    data = payload.encode() if isinstance(payload, str) else payload
    if out is None:
        sys.stdout.buffer.write(data)
        if not data.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")
        sys.stdout.flush()
        return
    Path(out).write_bytes(data)
    print(render_message("wrote_output", path=out), file=sys.stderr)


def _dump(document: Any) -> bytes:
    return orjson.dumps(document, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY)


def _load_valid_model(path: str) -> Imdp:
    model = _decode(path, parse_model)
    violations = validate(model)
    if violations:
        lines = [render_message("model_invalid", path=path, count=len(violations))]
        lines += [render_message("violation", **v.model_dump()) for v in violations]
        raise InputFileError("\n".join(lines))
    return model


def _load_query(path: str, mode: Optional[QueryMode]) -> Query:
    def parser(document: Any) -> Query:
        query = parse_query(document)
        if mode is None or query.mode is mode:
            return query
        # re-validate so that mode-specific rules apply
        return Query.model_validate({**query.model_dump(), "mode": mode})

    return _decode(path, parser)


def _prepare(args: argparse.Namespace, mode: Optional[QueryMode]) -> Tuple[Query, BasicQuery]:
    model = _load_valid_model(args.model)
    query = _load_query(args.query, mode)
    return query, prepare_query(model, query)


def _nature(args: argparse.Namespace) -> NaturePolicy:
    return NaturePolicy(mode=NatureMode(args.nature), seed=args.seed)


def cmd_validate(args: argparse.Namespace) -> ExitCode:
    model = _decode(args.model, parse_model)
    violations = validate(model)
    if violations:
        print(render_message("model_invalid", path=args.model, count=len(violations)), file=sys.stderr)
        for violation in violations:
            print(render_message("violation", **violation.model_dump()), file=sys.stderr)
        return ExitCode.INPUT_ERROR
    print(render_message("model_valid", path=args.model, states=len(model.states), rows=model.n_rows))
    return ExitCode.SUCCESS


def cmd_query(args: argparse.Namespace) -> ExitCode:
    mode = QueryMode(args.command)
    query, basic = _prepare(args, mode)
    report = run_basic(basic, query, args.epsilon, args.max_iters)
    if report.status is Outcome.UNDECIDED:
        cap = args.max_iters or query.max_iters or config.SYNTH_MAX_ITERATIONS
        print(render_message("undecided", iterations=cap, epsilon=report.epsilon), file=sys.stderr)
    if args.format == "csv" and report.vertices is not None:
        _emit(pareto_csv(report.vertices), args.out)
    else:
        _emit(report.to_json(exclude={"strategy"}), args.out)
    return STATUS_CODES[report.status]


def cmd_strategy(args: argparse.Namespace) -> ExitCode:
    query, basic = _prepare(args, None)
    if query.mode is QueryMode.PARETO:
        detail = "strategies are exported for synth or qnt queries"
        raise InputFileError(render_message("format_error", path=args.query, detail=detail))
    report = run_basic(basic, query, args.epsilon, args.max_iters)
    if report.strategy is None:
        return STATUS_CODES[report.status]

    kind = StrategyKind(args.kind)
    mixture: MixtureStrategy = report.strategy
    if kind is StrategyKind.COUNTING:
        best = max(range(len(mixture.probabilities)), key=mixture.probabilities.__getitem__)
        if len(mixture.components) > 1:
            logger.warning(
                "Exporting the most likely component of a mixture",
                components=len(mixture.components),
                probability=mixture.probabilities[best],
            )
        strategy = mixture.components[best]
    elif kind is StrategyKind.RANDOMISED:
        strategy = randomise(state_action_frequencies(basic.model, mixture, _nature(args)))
    else:
        strategy = mixture
    _emit(_dump(dump_strategy(strategy)), args.out)
    return STATUS_CODES[report.status]


def cmd_simulate(args: argparse.Namespace) -> ExitCode:
    query, basic = _prepare(args, None)
    if args.strategy:
        strategy = _decode(args.strategy, parse_strategy)
    else:
        report = run_basic(basic, query, args.epsilon, args.max_iters)
        if report.strategy is None:
            return STATUS_CODES[report.status]
        strategy = report.strategy
    result = simulate(
        basic.model,
        strategy,
        basic.structures,
        basic.bounds,
        nature=_nature(args),
        runs=args.runs,
        horizon=args.horizon,
        seed=args.seed,
        labels=basic.labels,
    )
    result = result.model_copy(update={"means": basic.to_user_units(result.means)})
    _emit(result.to_json(), args.out)
    return ExitCode.SUCCESS


def _cells(text: Optional[str]) -> List[Tuple[int, int]]:
    if not text:
        return []
    cells = []
    for item in text.split(";"):
        x, y = item.split(",")
        cells.append((int(x), int(y)))
    return cells


def cmd_gen(args: argparse.Namespace) -> ExitCode:
    if args.family == "antg":
        if args.layout:
            path = Path(args.layout)
            if path.suffix in (".yaml", ".yml"):
                layout = yaml.safe_load(path.read_text(encoding="utf-8"))
            else:
                layout = read_document(path)
            antg = AntgConfig.from_layout(layout)
            if args.n is not None:
                antg = antg.model_copy(update={"n": args.n, "exit": None})
        elif args.n is not None:
            # the shipped layout is drawn for n = 14 only
            antg = AntgConfig(n=args.n)
        else:
            antg = AntgConfig.default()
        model = gen_antg(antg)
    else:
        model = gen_grid(
            GridConfig(
                rows=args.rows,
                cols=args.cols,
                obstacles=_cells(args.obstacles),
                target=_cells(args.target)[0],
                start=_cells(args.start)[0] if args.start else (0, 0),
                forward_prob=args.forward,
                interval_noise=args.noise,
            )
        )
    _emit(_dump(dump_model(model)), args.out)
    return ExitCode.SUCCESS


def setup_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imdp-synth",
        description="Multi-objective robust strategy synthesis for interval MDPs.",
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL.")
    commands = parser.add_subparsers(dest="command", required=True)

    validate_parser = commands.add_parser("validate", help="Check a model file.")
    validate_parser.add_argument("--model", required=True)
    validate_parser.set_defaults(handler=cmd_validate)

    def add_query_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--model", required=True, help="Model JSON file.")
        sub.add_argument("--query", required=True, help="Query JSON file.")
        sub.add_argument("--epsilon", type=float, default=None, help="Value-iteration precision.")
        sub.add_argument("--max-iters", type=int, default=None, help="Cap on separating hyperplanes.")
        sub.add_argument("--out", default=None, help="Output file; stdout when omitted.")

    for mode in QueryMode:
        sub = commands.add_parser(mode.value, help=f"Run a {mode.value} query.")
        add_query_options(sub)
        sub.add_argument("--format", choices=("json", "csv"), default="json")
        sub.set_defaults(handler=cmd_query)

    def add_nature_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "--nature", choices=[m.value for m in NatureMode], default=NatureMode.ADVERSARIAL.value
        )
        sub.add_argument("--seed", type=int, default=config.SIMULATION_SEED)

    strategy_parser = commands.add_parser("strategy", help="Export a strategy for a query.")
    add_query_options(strategy_parser)
    add_nature_options(strategy_parser)
    strategy_parser.add_argument(
        "--kind", choices=[k.value for k in StrategyKind], default=StrategyKind.MIXTURE.value
    )
    strategy_parser.set_defaults(handler=cmd_strategy)

    simulate_parser = commands.add_parser("simulate", help="Monte-Carlo check of a strategy.")
    add_query_options(simulate_parser)
    add_nature_options(simulate_parser)
    simulate_parser.add_argument("--strategy", default=None, help="Strategy JSON; synthesized if omitted.")
    simulate_parser.add_argument("--runs", type=int, default=config.SIMULATION_RUNS)
    simulate_parser.add_argument("--horizon", type=int, default=config.SIMULATION_HORIZON)
    simulate_parser.set_defaults(handler=cmd_simulate)

    gen_parser = commands.add_parser("gen", help="Generate a case-study model.")
    gen_parser.add_argument("family", choices=("antg", "grid"))
    gen_parser.add_argument("--out", default=None)
    gen_parser.add_argument("--n", type=int, default=None, help="Museum size (antg).")
    gen_parser.add_argument("--layout", default=None, help="Museum layout YAML or JSON (antg).")
    gen_parser.add_argument("--rows", type=int, default=5)
    gen_parser.add_argument("--cols", type=int, default=5)
    gen_parser.add_argument("--target", default="4,4", help="Target cell 'x,y' (grid).")
    gen_parser.add_argument("--start", default=None, help="Start cell 'x,y' (grid).")
    gen_parser.add_argument("--obstacles", default=None, help="Cells 'x,y;x,y' (grid).")
    gen_parser.add_argument("--forward", type=float, default=0.8)
    gen_parser.add_argument("--noise", type=float, default=0.0)
    gen_parser.set_defaults(handler=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = setup_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        configure_logging(args.log_level)
    logger.debug("Starting command", command=args.command)

    try:
        return int(args.handler(args))
    except InputFileError as e:
        print(str(e), file=sys.stderr)
        return int(ExitCode.INPUT_ERROR)
    except AssumptionError as e:
        print(render_message("assumption_failed", detail=str(e)), file=sys.stderr)
        return int(ExitCode.INPUT_ERROR)
    except UnsatisfiableQueryError as e:
        print(render_message("unsatisfiable", detail=str(e)), file=sys.stderr)
        return int(ExitCode.UNACHIEVABLE)
    except ConvergenceError as e:
        logger.warning("Computation did not converge", error=str(e))
        print(render_message("engine_error", detail=str(e)), file=sys.stderr)
        return int(ExitCode.UNDECIDED)
    except (ImdpError, pydantic.ValidationError, ValueError) as e:
        logger.error("Command failed", command=args.command, error=str(e))
        print(render_message("engine_error", detail=str(e)), file=sys.stderr)
        return int(ExitCode.INPUT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
