import argparse
import csv
import io
import json
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from polycert.libs.certificates import (
    CertificateFormatError,
    TooManyConstraintsError,
    Unknown,
    archimedean_search,
    certify_coercive,
    certify_compact,
    cubic_sos_certificate,
    verify_certificate,
)
from polycert.libs.conic import MalformedProgramError, SolverInaccurateError, SolveStatus, SosDegreeError
from polycert.libs.cubic_minima import (
    arctan_example,
    classify_point,
    cubic_sos_relaxation,
    find_local_minimum,
    second_order_sdp,
    third_order_newton,
)
from polycert.libs.games import (
    BimatrixGame,
    EnumerationLimitError,
    GameFormatError,
    NotSymmetricGameError,
    enumerate_nash_small,
    epsilon_of,
    symmetrize,
)
from polycert.libs.hardness import (
    Graph,
    InstanceArgumentError,
    InstanceSizeError,
    SatInstance,
    UnknownVariantError,
    gen_exponential_bitsize,
    gen_maxcut_instance,
    gen_sat_attainment,
    gen_spectrahedron_cubic,
    gen_stableset_family,
)
from polycert.libs.nash_sdp import (
    EXCLUSION_METHODS,
    WELFARE_METHODS,
    RankError,
    epsilon_bounds,
    lasserre1_bound,
    nash_benchmark,
    recover_rank2,
    sdp2_objective_bound,
    solve_rank_lowering,
    strategy_exclusion,
    welfare_bound,
    welfare_objective,
)
from polycert.libs.polynomial import (
    DegreeError,
    DimensionMismatchError,
    Point,
    Polynomial,
    PolynomialFormatError,
    SymmetryError,
    to_cubic_canonical,
)
from polycert.utils.constants import (
    BENCH_COLUMNS,
    CRITICAL_CUBIC_STR,
    DEFAULT_ITERS,
    DEFAULT_R_MAX,
    DEFAULT_TOL,
    DIAGONAL_GAP_STR,
    EXIT_FAILURE,
    EXIT_INCONCLUSIVE,
    EXIT_NEGATIVE,
    EXIT_SUCCESS,
    EXIT_USAGE,
    GRIESMER_STR,
    JURG_STR,
    LOCAL_MIN_STR,
    LOGGER,
    LP1_STR,
    LP2_STR,
    NEWTON_MODES,
    NO_LOCAL_MIN_STR,
    RANK_LOWERING_OBJECTIVES,
    RESIDUAL_FACTOR,
    SAT_VARIANTS,
    SDP3_STR,
    SDP4_STR,
    SECOND_ORDER_QUARTIC_STR,
    SUPPORTED_SOLVERS,
    UNIVARIATE_STR,
)
from polycert.utils.helpers import get_command_config, get_config_data, get_value_from_dicts, new_log_prefix

FORMAT_ERRORS = (
    CertificateFormatError,
    DegreeError,
    DimensionMismatchError,
    EnumerationLimitError,
    GameFormatError,
    InstanceArgumentError,
    InstanceSizeError,
    MalformedProgramError,
    NotSymmetricGameError,
    PolynomialFormatError,
    SosDegreeError,
    SymmetryError,
    TooManyConstraintsError,
    UnknownVariantError,
)


NASH_METHODS = {
    "welfare": WELFARE_METHODS,
    "exclude": EXCLUSION_METHODS,
    "symmetrize": (GRIESMER_STR, JURG_STR),
}


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


class Settings:
    """Tunable lookup: CLI flag, then the command section of config.yaml, then its global section, then default."""

    def __init__(self, args: argparse.Namespace, command_name: str):
        self.args = args
        self.config_data = get_config_data(data_dir=args.config_dir) or {}
        self.command_config = get_command_config(command_name=command_name, data_dir=args.config_dir) or {}

    def get(self, key: str, default: Any = None) -> Any:
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        return get_value_from_dicts(
            primary_dict=self.command_config, secondary_dict=self.config_data, key=key, return_on_none=default
        )

    @property
    def tol(self) -> float:
        return float(self.get(key="tol", default=DEFAULT_TOL))

    @property
    def solver(self) -> Optional[str]:
        return self.get(key="solver")


def load_json(path: str) -> Any:
    """Read JSON from a file, or from stdin for '-'."""
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fd:
            return json.load(fd)
    except json.JSONDecodeError as ex:
        raise UsageError(f"{path}: malformed JSON at line {ex.lineno}, column {ex.colno}: {ex.msg}")
    except OSError as ex:
        raise UsageError(f"{path}: {ex}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Expected a comma separated list of integers, got '{text}'")


def _load_polynomial(path: str) -> Polynomial:
    return Polynomial.from_json(load_json(path=path))


def _load_constraints(path: str) -> List[Polynomial]:
    data = load_json(path=path)
    items = data.get("constraints") if isinstance(data, dict) else data
    if not isinstance(items, list) or not items:
        raise UsageError(f"{path}: expected a non-empty list of constraint polynomials")
    return [Polynomial.from_json(item) for item in items]


def _load_graph(path: str) -> Graph:
    data = load_json(path=path)
    if not isinstance(data, dict) or "n" not in data:
        raise UsageError(f"{path}: graph JSON needs 'n' and 'edges' or 'adjacency'")
    try:
        if "adjacency" in data:
            return Graph(n=data["n"], adjacency=tuple(tuple(row) for row in data["adjacency"]))
        return Graph.from_edges(n=data["n"], edges=[tuple(edge) for edge in data.get("edges", [])])
    except (ValueError, TypeError, IndexError) as ex:
        raise UsageError(f"{path}: invalid graph: {ex}")


def _load_game(path: str) -> BimatrixGame:
    return BimatrixGame.from_json(load_json(path=path))


def _with_tol(report: Dict[str, Any], settings: Settings) -> Dict[str, Any]:
    return {"tol": settings.tol, **report}


Handler = Callable[[argparse.Namespace, Settings], Tuple[Any, int]]


def classify(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    p = _load_polynomial(path=args.poly)
    report = classify_point(p=p, x=Point.parse(args.point), tol=settings.tol)
    if report.local_min:
        code = EXIT_SUCCESS
    else:
        code = EXIT_NEGATIVE if report.certified else EXIT_INCONCLUSIVE
    return _with_tol(report=report.to_json(), settings=settings), code


def find_local_min(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    p = _load_polynomial(path=args.poly)
    result = find_local_minimum(p=p, want_strict=args.strict, tol=settings.tol, solver=settings.solver)
    codes = {LOCAL_MIN_STR: EXIT_SUCCESS, NO_LOCAL_MIN_STR: EXIT_NEGATIVE}
    return _with_tol(report=result.to_json(), settings=settings), codes.get(result.outcome, EXIT_INCONCLUSIVE)


def second_order(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    c = to_cubic_canonical(_load_polynomial(path=args.poly))
    outcome, solution, bound = second_order_sdp(c=c, tol=settings.tol, solver=settings.solver)
    report = {
        "outcome": outcome.to_json(),
        "solution": solution.to_json() if solution else None,
        "epsilon_bound": bound,
    }
    if outcome.status is SolveStatus.INFEASIBLE:
        return _with_tol(report=report, settings=settings), EXIT_NEGATIVE
    if solution is None:
        return _with_tol(report=report, settings=settings), EXIT_INCONCLUSIVE

    has_point = solution.objective <= RESIDUAL_FACTOR * settings.tol * (1 + float(np.max(np.abs(solution.Y))))
    report["has_second_order_point"] = has_point
    if has_point:
        return _with_tol(report=report, settings=settings), EXIT_SUCCESS
    return _with_tol(report=report, settings=settings), EXIT_NEGATIVE if outcome.is_optimal else EXIT_INCONCLUSIVE


def sos_relax(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    c = to_cubic_canonical(_load_polynomial(path=args.poly))
    result = cubic_sos_relaxation(c=c, tol=settings.tol, solver=settings.solver)
    report = result.to_json()
    if result.gamma is None:
        return _with_tol(report=report, settings=settings), EXIT_INCONCLUSIVE

    report["certificate"] = cubic_sos_certificate(c=c, result=result, tol=settings.tol).to_json()
    return _with_tol(report=report, settings=settings), EXIT_SUCCESS


def newton3(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    if args.arctan:
        function = arctan_example
    elif args.poly:
        function = _load_polynomial(path=args.poly)
    else:
        raise UsageError("newton3 needs --poly or --arctan")

    trace = third_order_newton(
        f=function,
        x0=Point.parse(args.x0).as_floats(),
        iters=int(settings.get(key="iters", default=DEFAULT_ITERS)),
        mode=args.mode,
        tol=settings.tol,
        solver=settings.solver,
    )
    return _with_tol(report=trace.to_json(), settings=settings), EXIT_INCONCLUSIVE if trace.halted else EXIT_SUCCESS


def _certificate_exit(result: Any) -> int:
    return EXIT_INCONCLUSIVE if isinstance(result, Unknown) else EXIT_SUCCESS


def certify(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    r_max = int(settings.get(key="r_max", default=DEFAULT_R_MAX))
    if args.kind == "coercive":
        result = certify_coercive(
            p=_load_polynomial(path=args.poly), r_max=r_max, tol=settings.tol, solver=settings.solver
        )
    elif args.kind == "compact":
        result = certify_compact(
            qs=_load_constraints(path=args.constraints),
            R=args.radius,
            r_max=r_max,
            tol=settings.tol,
            solver=settings.solver,
        )
    else:
        if args.radius is None:
            raise UsageError("certify archimedean needs --radius")
        result = archimedean_search(
            qs=_load_constraints(path=args.constraints),
            R=args.radius,
            degree=args.degree,
            tol=settings.tol,
            solver=settings.solver,
        )
    return _with_tol(report=result.to_json(), settings=settings), _certificate_exit(result=result)


def verify_cert(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    data = load_json(path=args.cert)
    if isinstance(data, dict) and "certificate" in data:
        data = data["certificate"]
    result = verify_certificate(data)
    return result.to_json(), EXIT_SUCCESS if result.valid else EXIT_NEGATIVE


def generate(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    if args.family == "maxcut":
        instance = gen_maxcut_instance(G=_load_graph(path=args.graph), k=args.k, variant=args.variant)
    elif args.family == "stableset":
        instance = gen_stableset_family(G=_load_graph(path=args.graph), r=args.r, exact_bound=args.exact_bound)
    elif args.family == "sat":
        data = load_json(path=args.formula)
        try:
            phi = SatInstance.of(nvars=data["nvars"], clauses=data["clauses"])
        except (KeyError, TypeError, ValueError) as ex:
            raise UsageError(f"{args.formula}: invalid formula: {ex}")
        instance = gen_sat_attainment(phi=phi, variant=args.variant)
    elif args.family == "spectrahedron":
        data = load_json(path=args.pencil)
        matrices = data.get("matrices") if isinstance(data, dict) else data
        try:
            instance = gen_spectrahedron_cubic(matrices=matrices)
        except (ValueError, TypeError) as ex:
            raise UsageError(f"{args.pencil}: invalid pencil: {ex}")
    else:
        instance = gen_exponential_bitsize(n=args.n)
    return instance.to_json(), EXIT_SUCCESS


def _game_report(game: BimatrixGame, x: Any, y: Any) -> Dict[str, Any]:
    return {
        "x": np.asarray(x, dtype=float).tolist(),
        "y": np.asarray(y, dtype=float).tolist(),
        "epsilon": epsilon_of(game=game, x=x, y=y).to_json(),
    }


def nash(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    game = _load_game(path=args.game)
    tol, solver = settings.tol, settings.solver
    action = args.action

    if action in ("solve", "bounds", "recover"):
        run = solve_rank_lowering(
            game=game,
            objective=settings.get(key="objective", default=DIAGONAL_GAP_STR),
            iters=int(settings.get(key="iters", default=DEFAULT_ITERS)),
            tol=tol,
            solver=solver,
        )
        x, y = run.solution.strategies()
        report: Dict[str, Any] = {
            **_game_report(game=game, x=x, y=y),
            "trace": [record.to_json() for record in run.trace],
        }
        if action == "bounds":
            report["bounds"] = epsilon_bounds(sol=run.solution).to_json()
        if action == "recover":
            try:
                report["recovery"] = recover_rank2(game=game, sol=run.solution, symmetric_mode=args.symmetric).to_json()
            except RankError as ex:
                report["recovery"] = {"error": str(ex)}
                return _with_tol(report=report, settings=settings), EXIT_INCONCLUSIVE
        return _with_tol(report=report, settings=settings), EXIT_SUCCESS

    if action == "welfare":
        bound = welfare_bound(game=game, method=args.method or SDP3_STR, tol=tol, solver=solver)
        return bound.to_json(), EXIT_SUCCESS if bound.value is not None else EXIT_INCONCLUSIVE

    if action == "exclude":
        result = strategy_exclusion(
            game=game, strategies=_int_list(args.strategies), method=args.method or SDP4_STR, tol=tol, solver=solver
        )
        return result.to_json(), EXIT_SUCCESS if result.persistent else EXIT_INCONCLUSIVE

    if action == "symmetrize":
        symmetrization = symmetrize(game=game, method=args.method or GRIESMER_STR, shift=not args.no_shift)
        return symmetrization.to_json(), EXIT_SUCCESS

    if action == "lasserre1":
        C = welfare_objective(game=game) if args.objective_matrix is None else load_json(path=args.objective_matrix)
        report = {
            "lasserre1": lasserre1_bound(game=game, C=C, tol=tol, solver=solver).to_json(),
            "sdp2": sdp2_objective_bound(game=game, C=C, tol=tol, solver=solver).to_json(),
        }
        return report, EXIT_SUCCESS

    enumeration = enumerate_nash_small(game=game, max_support=args.max_support)
    return enumeration.to_json(), EXIT_SUCCESS


def bench_csv(rows: Sequence[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(BENCH_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: f"{value:.6g}" if isinstance(value, float) else value for key, value in row.items()})
    return buffer.getvalue()


def bench(args: argparse.Namespace, settings: Settings) -> Tuple[Any, int]:
    jobs = settings.get(key="jobs")
    rows = nash_benchmark(
        sizes=_int_list(args.sizes),
        count=args.count,
        seed=int(settings.get(key="seed", default=0)),
        objective=settings.get(key="objective", default=DIAGONAL_GAP_STR),
        iters=int(settings.get(key="iters", default=DEFAULT_ITERS)),
        tol=settings.tol,
        jobs=int(jobs) if jobs is not None else None,
        solver=settings.solver,
    )
    return bench_csv(rows=rows), EXIT_SUCCESS


HANDLERS: Dict[str, Handler] = {
    "classify": classify,
    "find-local-min": find_local_min,
    "second-order": second_order,
    "sos-relax": sos_relax,
    "newton3": newton3,
    "certify": certify,
    "verify-cert": verify_cert,
    "gen": generate,
    "nash": nash,
    "bench": bench,
}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="polycert", description="Certificates and relaxations for polynomial optimization")
    parser.add_argument("--config-dir", default=None, help="Directory holding config.yaml")
    parser.add_argument("--solver", default=None, choices=SUPPORTED_SOLVERS, help="Conic solver backend")
    parser.add_argument("--log-level", default=None, help="Logger level (DEBUG, INFO, WARNING, ...)")
    parser.add_argument("--out", default=None, help="Write the report here instead of stdout")

    common = ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help=f"Solver tolerance (default {DEFAULT_TOL})")

    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("classify", parents=[common], help="Classify a point of a cubic")
    sub.add_argument("--poly", required=True)
    sub.add_argument("--point", required=True, help="Comma separated coordinates, e.g. '0,1/2'")

    sub = commands.add_parser("find-local-min", parents=[common], help="Find a local minimum of a cubic")
    sub.add_argument("--poly", required=True)
    sub.add_argument("--strict", action="store_true")

    sub = commands.add_parser("second-order", parents=[common], help="Solve the second-order point SDP")
    sub.add_argument("--poly", required=True)

    sub = commands.add_parser("sos-relax", parents=[common], help="Cubic sos relaxation with certificate")
    sub.add_argument("--poly", required=True)

    sub = commands.add_parser("newton3", parents=[common], help="Third-order Newton iterations")
    sub.add_argument("--poly", default=None)
    sub.add_argument("--arctan", action="store_true", help="Use the built-in arctan test function")
    sub.add_argument("--x0", required=True)
    sub.add_argument("--iters", type=int, default=None)
    sub.add_argument("--mode", choices=NEWTON_MODES, default=UNIVARIATE_STR)

    sub = commands.add_parser("certify", parents=[common], help="Search a positivity certificate")
    sub.add_argument("kind", choices=("coercive", "compact", "archimedean"))
    sub.add_argument("--poly", default=None)
    sub.add_argument("--constraints", default=None)
    sub.add_argument("--radius", type=float, default=None)
    sub.add_argument("--degree", type=int, default=2)
    sub.add_argument("--r-max", dest="r_max", type=int, default=None)

    sub = commands.add_parser("verify-cert", help="Replay a certificate without a solver")
    sub.add_argument("--cert", required=True)

    sub = commands.add_parser("gen", help="Generate hard instances with ground truth")
    sub.add_argument("family", choices=("maxcut", "stableset", "sat", "spectrahedron", "expbits"))
    sub.add_argument("--graph", default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--r", type=int, default=None)
    sub.add_argument("--exact-bound", action="store_true")
    sub.add_argument("--formula", default=None)
    sub.add_argument("--pencil", default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--variant", default=None)

    sub = commands.add_parser("nash", parents=[common], help="Semidefinite relaxations of Nash equilibria")
    sub.add_argument(
        "action", choices=("solve", "bounds", "recover", "welfare", "exclude", "symmetrize", "lasserre1", "enumerate")
    )
    sub.add_argument("--game", required=True)
    sub.add_argument("--objective", choices=RANK_LOWERING_OBJECTIVES, default=None)
    sub.add_argument("--iters", type=int, default=None)
    sub.add_argument("--symmetric", action="store_true")
    sub.add_argument("--method", default=None, choices=(LP1_STR, SDP3_STR, LP2_STR, SDP4_STR, GRIESMER_STR, JURG_STR))
    sub.add_argument("--strategies", default=None, help="Comma separated strategy indices")
    sub.add_argument("--no-shift", action="store_true")
    sub.add_argument("--objective-matrix", default=None)
    sub.add_argument("--max-support", type=int, default=None)

    sub = commands.add_parser("bench", parents=[common], help="ε statistics over seeded random games")
    sub.add_argument("--sizes", default="5")
    sub.add_argument("--count", type=int, default=10)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--objective", choices=RANK_LOWERING_OBJECTIVES, default=None)
    sub.add_argument("--iters", type=int, default=None)
    sub.add_argument("--jobs", type=int, default=None)
    return parser


def _check_arguments(args: argparse.Namespace) -> None:
    required = {
        ("certify", "coercive"): ["poly"],
        ("certify", "compact"): ["constraints"],
        ("certify", "archimedean"): ["constraints"],
        ("gen", "maxcut"): ["graph", "k"],
        ("gen", "stableset"): ["graph", "r"],
        ("gen", "sat"): ["formula", "variant"],
        ("gen", "spectrahedron"): ["pencil"],
        ("gen", "expbits"): ["n"],
        ("nash", "exclude"): ["strategies"],
    }
    key = (args.command, getattr(args, "kind", None) or getattr(args, "family", None) or getattr(args, "action", None))
    missing = [f"--{name.replace('_', '-')}" for name in required.get(key, []) if getattr(args, name, None) is None]
    if missing:
        raise UsageError(f"{' '.join(key)} needs {', '.join(missing)}")

    if args.command == "gen" and args.family == "maxcut":
        args.variant = args.variant or CRITICAL_CUBIC_STR
        if args.variant not in (CRITICAL_CUBIC_STR, SECOND_ORDER_QUARTIC_STR):
            raise UsageError(f"maxcut variant must be {CRITICAL_CUBIC_STR} or {SECOND_ORDER_QUARTIC_STR}")
    if args.command == "gen" and args.family == "sat" and args.variant not in SAT_VARIANTS:
        raise UsageError(f"sat variant must be one of {', '.join(SAT_VARIANTS)}")

    if args.command == "nash" and args.method is not None:
        allowed = NASH_METHODS.get(args.action, ())
        if args.method not in allowed:
            raise UsageError(f"nash {args.action} accepts --method {', '.join(allowed) or '(none)'}")


def _command_name(args: argparse.Namespace) -> str:
    sub = getattr(args, "kind", None) or getattr(args, "family", None) or getattr(args, "action", None)
    return f"{args.command}-{sub}" if sub else args.command


def _emit(report: Any, out: Optional[str]) -> None:
    text = report if isinstance(report, str) else json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fd:
            fd.write(text)
    else:
        sys.stdout.write(text)


def parse_and_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_arguments(args=args)
    except UsageError as ex:
        LOGGER.error(str(ex))
        sys.stderr.write(f"{ex}\n")
        return EXIT_USAGE

    if args.log_level:
        LOGGER.setLevel(args.log_level.upper())

    command_name = _command_name(args=args)
    log_prefix = new_log_prefix(name=command_name)
    settings = Settings(args=args, command_name=command_name)
    LOGGER.info(f"{log_prefix} running with tol {settings.tol}")
    try:
        report, code = HANDLERS[args.command](args, settings)
    except (UsageError, *FORMAT_ERRORS) as ex:
        LOGGER.error(f"{log_prefix} {ex}")
        sys.stderr.write(f"{ex}\n")
        return EXIT_USAGE
    except SolverInaccurateError as ex:
        LOGGER.warning(f"{log_prefix} {ex}")
        _emit(report={"error": str(ex), "tol": settings.tol}, out=args.out)
        return EXIT_INCONCLUSIVE
    except Exception as ex:
        LOGGER.exception(f"{log_prefix} failed: {ex}")
        return EXIT_FAILURE

    _emit(report=report, out=args.out)
    LOGGER.info(f"{log_prefix} exit {code}")
    return code


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
