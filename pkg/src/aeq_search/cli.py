"""
Command-line entry point.

    aeq enumerate --dim 3 --max-n 12 --mode all
    aeq construct --larman-rogers 6 --output lr6.json
    aeq verify --points lr6.json
    aeq fixture --name G11 --output g11.g6
    aeq embed --graph g11.g6 --dim 3 --restarts 100 --seed 0
    aeq bounds --table 9

Exit codes: 0 success, 1 verification failed, 2 enumeration cut short by the
time budget, 3 input error.
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError

from src.aeq_search import __version__
from src.aeq_search.certify import bounds_table, format_bounds_table, known_bounds
from src.aeq_search.config import get_settings
from src.aeq_search.constructions import (
    fixture_names,
    larman_rogers,
    named_fixture,
    named_point_set,
    two_simplex_construction,
)
from src.aeq_search.embed import EmbedConfig, EmbeddingResult, embed
from src.aeq_search.enumeration import EnumerationResult, SearchConfig, SearchMode, enumerate_aeq
from src.aeq_search.errors import AeqError, GraphError, PointSetError, SearchBudgetExceeded
from src.aeq_search.geometry import PointSet, VerificationReport, is_almost_equidistant, parse_point_set
from src.aeq_search.graphcore import read_graph6_file, to_graph6, write_graph6_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_BUDGET_EXCEEDED = 2
EXIT_INPUT_ERROR = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class RunManifest(BaseModel):
    subcommand: str
    parameters: Dict[str, Any]
    seed: Optional[int] = None
    wall_time: float = Field(..., description="Seconds spent in the subcommand")
    complete: bool = True
    version: str = __version__


class ConstructOutput(BaseModel):
    manifest: RunManifest
    report: VerificationReport
    points_file: Optional[str] = None
    point_set: Optional[PointSet] = None


class VerifyOutput(BaseModel):
    manifest: RunManifest
    points_file: str
    report: VerificationReport


class EmbedOutput(BaseModel):
    manifest: RunManifest
    graph_file: str
    graph_index: int
    result: EmbeddingResult


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors, not argparse's default exit status 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _parameters(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"handler", "log_level"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest(args: argparse.Namespace, started: float, complete: bool = True, seed: Optional[int] = None) -> RunManifest:
    return RunManifest(
        subcommand=args.command,
        parameters=_parameters(args),
        seed=seed,
        wall_time=time.monotonic() - started,
        complete=complete,
    )


def _emit(text: str, output: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(text)


def _write_sidecar(path: str, manifest: RunManifest) -> None:
    Path(f"{path}.manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")


def _print_witness(report: VerificationReport) -> None:
    if report.witness is not None:
        i, j, k = report.witness
        print(f"witness: points {i} {j} {k} have no pair at unit distance", file=sys.stderr)


def run_enumerate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = SearchConfig(
        d=args.dim,
        n_max=args.max_n,
        mode=args.mode,
        parallel_depth=args.parallel_depth,
        time_budget=args.time_budget,
        jobs=args.jobs,
        progress=args.progress,
    )
    exit_code = EXIT_OK
    try:
        result: EnumerationResult = enumerate_aeq(cfg)
    except SearchBudgetExceeded as e:
        result = e.result
        exit_code = EXIT_BUDGET_EXCEEDED
        logger.warning("Counts from n=%d on are incomplete", max(result.levels))

    manifest = _manifest(args, started, complete=exit_code == EXIT_OK)
    _emit(result.table.to_csv(mode=cfg.mode), args.output)
    if args.output:
        _write_sidecar(args.output, manifest)
    else:
        logger.info("manifest: %s", manifest.model_dump_json())

    if args.emit_graphs:
        count = write_graph6_file(args.emit_graphs, result.representatives(cfg.mode))
        _write_sidecar(args.emit_graphs, manifest)
        logger.info("Wrote %d graphs to %s", count, args.emit_graphs)
    return exit_code


def _constructed_point_set(args: argparse.Namespace) -> PointSet:
    if args.name is not None:
        return named_point_set(args.name)
    if args.two_simplex is not None:
        return two_simplex_construction(args.two_simplex, sign=args.sign)
    return larman_rogers(args.larman_rogers)


def run_construct(args: argparse.Namespace) -> int:
    started = time.monotonic()
    ps = _constructed_point_set(args)
    report = is_almost_equidistant(ps)
    manifest = _manifest(args, started)
    if args.output:
        document = json.loads(ps.model_dump_json(exclude_none=True))
        document["manifest"] = json.loads(manifest.model_dump_json())
        Path(args.output).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
        output = ConstructOutput(manifest=manifest, report=report, points_file=args.output)
    else:
        output = ConstructOutput(manifest=manifest, report=report, point_set=ps)
    sys.stdout.write(output.model_dump_json(indent=2, exclude_none=True) + "\n")
    logger.info("%d points in R^%d, almost-equidistant: %s", ps.n, ps.d, report.ok)
    if not report.ok:
        _print_witness(report)
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def read_points_file(path: str) -> PointSet:
    """Read a point file; documents written by `construct` without --output are unwrapped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PointSetError(f"{path}: {e.strerror or e}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise PointSetError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if isinstance(document, dict) and "point_set" in document:
        text = json.dumps(document["point_set"])
    try:
        return parse_point_set(text)
    except PointSetError as e:
        raise PointSetError(f"{path}: {e}") from e


def run_verify(args: argparse.Namespace) -> int:
    started = time.monotonic()
    ps = read_points_file(args.points)
    report = is_almost_equidistant(ps)
    output = VerifyOutput(manifest=_manifest(args, started), points_file=args.points, report=report)
    _emit(output.model_dump_json(indent=2, exclude_none=True), args.output)
    if not report.ok:
        _print_witness(report)
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def run_embed(args: argparse.Namespace) -> int:
    started = time.monotonic()
    graphs = read_graph6_file(args.graph)
    if not 0 <= args.index < len(graphs):
        raise GraphError(f"{args.graph} holds {len(graphs)} graphs, no index {args.index}")
    cfg = EmbedConfig(
        d=args.dim,
        restarts=args.restarts,
        rng_seed=args.seed,
        max_iters=args.max_iters,
        jobs=args.jobs,
    )
    result = embed(graphs[args.index], cfg)
    output = EmbedOutput(
        manifest=_manifest(args, started, seed=args.seed),
        graph_file=args.graph,
        graph_index=args.index,
        result=result,
    )
    _emit(output.model_dump_json(indent=2, exclude_none=True), args.output)
    return EXIT_OK


def run_bounds(args: argparse.Namespace) -> int:
    frame = bounds_table(args.table) if args.table is not None else bounds_table(args.dim, dims=[args.dim])
    fmt = args.format or ("text" if args.table is not None else "json")
    if fmt == "text":
        text = format_bounds_table(frame)
    elif fmt == "csv":
        text = frame.to_csv(index=False)
    elif args.table is None:
        text = known_bounds(args.dim).model_dump_json(indent=2)
    else:
        text = json.dumps([known_bounds(int(d)).model_dump() for d in frame["d"]], indent=2)
    _emit(text, args.output)
    return EXIT_OK


def run_fixture(args: argparse.Namespace) -> int:
    if args.list:
        _emit("\n".join(fixture_names()), args.output)
        return EXIT_OK
    fixture = named_fixture(args.name)
    _emit(to_graph6(fixture.graph), args.output)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = _Parser(prog="aeq", description="Almost-equidistant point sets and their abstract graphs")
    parser.add_argument("--log-level", default=settings.log_level, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--progress", action="store_true", help="Show progress bars on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enumerate", help="Count abstract almost-equidistant graphs")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in SearchMode], default=SearchMode.ALL.value)
    p.add_argument("--emit-graphs", metavar="PATH", help="Write the representatives of the chosen mode as graph6")
    p.add_argument("--time-budget", type=float, metavar="SECS")
    p.add_argument("--jobs", type=_positive_int, default=settings.jobs)
    p.add_argument("--parallel-depth", type=int, default=0)
    p.add_argument("--output", metavar="PATH", help="CSV file instead of stdout")
    p.set_defaults(handler=run_enumerate)

    p = sub.add_parser("construct", help="Build a named point set and verify it")
    selector = p.add_mutually_exclusive_group(required=True)
    selector.add_argument("--name", help="Named point set")
    selector.add_argument("--two-simplex", type=int, metavar="D")
    selector.add_argument("--larman-rogers", type=int, metavar="D")
    p.add_argument("--sign", type=int, choices=[1, -1], default=1, help="Rotation direction for --two-simplex")
    p.add_argument("--output", metavar="PATH", help="Write the point file here")
    p.set_defaults(handler=run_construct)

    p = sub.add_parser("verify", help="Check that a point file is almost-equidistant")
    p.add_argument("--points", required=True, metavar="FILE")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(handler=run_verify)

    p = sub.add_parser("embed", help="Search numerically for a unit-distance realization")
    p.add_argument("--graph", required=True, metavar="FILE", help="graph6 file")
    p.add_argument("--index", type=int, default=0, help="Which graph of the file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--restarts", type=_positive_int, default=settings.embed_restarts)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=_positive_int, default=3000)
    p.add_argument("--jobs", type=_positive_int, default=settings.jobs)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(handler=run_embed)

    p = sub.add_parser("bounds", help="Known bounds on the largest almost-equidistant set")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--dim", type=_positive_int)
    which.add_argument("--table", type=_positive_int, metavar="MAXD")
    p.add_argument("--format", choices=["text", "json", "csv"], default=None)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(handler=run_bounds)

    p = sub.add_parser("fixture", help="Write a named fixture graph as graph6")
    names = p.add_mutually_exclusive_group(required=True)
    names.add_argument("--name")
    names.add_argument("--list", action="store_true", help="List fixture names")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(handler=run_fixture)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except AeqError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    args = parser.parse_args(argv)
    try:
        logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)
        return args.handler(args)
    except ValidationError as e:
        first = e.errors()[0]
        print(f"error: {'.'.join(str(p) for p in first['loc'])}: {first['msg']}", file=sys.stderr)
    except (AeqError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
