"""Command Line Interface for the item fairness toolkit.

This module provides subcommands to evaluate run files, tabulate bounds,
correlate measures across systems, generate synthetic runs and search the
exact extremes of a measure by enumeration.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .analysis import correlation_matrix
from .bounds import all_bounds
from .config import EvalParams, load_params
from .errors import NormalizationDegenerate, PoolExhausted, RunValidationError, SpaceTooLarge
from .evaluator import FairnessEvaluator
from .experiments import (
    Generator,
    InsertionMode,
    InsertionState,
    RecommendationMode,
    endpoint_table,
    generate,
    insertion_sweep,
    sliding_window,
)
from .models import ItemCatalog, SimilarityProvider, SimilarityVariant, UserSet
from .oracle import DEFAULT_CAP, ORACLE_MEASURES, EnumerationSpec, enumerate_all_extremes, vocd_similarity_sweep
from .parser import RunParser, format_run
from .report import ReportWriter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DEGENERATE = 2
EXIT_SPACE_TOO_LARGE = 3


def setup_logging(verbose: bool = False) -> None:
    """Configure logging for the CLI."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def _add_output_options(parser: argparse.ArgumentParser, default_format: str) -> None:
    parser.add_argument(
        "-o", "--output",
        type=str,
        help="Output file (default: stdout)"
    )
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default=default_format,
        help=f"Output format (default: {default_format})"
    )


def _add_param_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=float, help="RBP patience for II-D/AI-D (default: 0.8)")
    parser.add_argument("--alpha", type=float, help="VoCD cosine distance threshold (default: 2)")
    parser.add_argument("--beta", type=float, help="VoCD disparity tolerance (default: 0)")
    parser.add_argument("--log-base", type=float, help="Entropy log base (default: n)")


def _named_run(value: str) -> tuple[str, str]:
    if "=" in value:
        name, path = value.split("=", 1)
        return name, path
    return Path(value).stem, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Individual item fairness evaluation of top-k recommendations",
        prog="itemfair"
    )
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose output"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--config",
        type=str,
        help="YAML file with evaluation parameters; flags override it"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="Evaluate one or more run files")
    p.add_argument("--run", action="append", required=True, type=_named_run,
                   help="Run file, optionally NAME=PATH; repeat for several systems")
    p.add_argument("--catalog", required=True, help="Catalog file (one item id per line)")
    p.add_argument("--qrels", help="Binary relevance judgments")
    p.add_argument("--k", type=int, help="Expected cutoff, checked against every run")
    p.add_argument("--embeddings", help="Item embeddings for VoCD similarity")
    p.add_argument("--strict", action="store_true",
                   help="Fail (exit 2) instead of reporting degenerate corrections as undefined")
    _add_param_options(p)
    _add_output_options(p, "json")

    p = sub.add_parser("bounds", help="Closed-form most fair / most unfair scores")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True, help="Number of users")
    p.add_argument("--n", type=int, required=True, help="Number of items")
    p.add_argument("--rounds", type=int, default=1, help="Number of rounds W")
    p.add_argument("--beta", type=float)
    p.add_argument("--log-base", type=float)
    _add_output_options(p, "csv")

    p = sub.add_parser("correlate", help="Kendall's tau between measures of a score matrix")
    p.add_argument("scores", help="Score matrix CSV (as written by eval with several runs)")
    p.add_argument("--bh-alpha", type=float, help="Significance level (default: 0.05)")
    _add_output_options(p, "csv")

    p = sub.add_parser("synth", help="Generate a most fair or most unfair run")
    p.add_argument("generator", choices=[g.value for g in Generator])
    p.add_argument("mode", choices=[m.value for m in RecommendationMode])
    p.add_argument("--k", type=int, help="Cutoff of the generated run")
    p.add_argument("--users", type=int, help="Number of synthetic users u1..um")
    p.add_argument("--items", type=int, help="Number of synthetic items i1..in")
    p.add_argument("--catalog", help="Catalog file instead of --items")
    p.add_argument("--exclusions", help="Per-user excluded items (nonrepeatable mode)")
    p.add_argument("--table", type=int, nargs="+", metavar="K",
                   help="Emit the endpoint score table for these cutoffs instead of a run")
    _add_output_options(p, "csv")

    p = sub.add_parser("window", help="Cut a rank window out of a deep run")
    p.add_argument("run", help="Deep run file")
    p.add_argument("--start", type=int, default=1, help="First rank of the window (default: 1)")
    p.add_argument("--width", type=int, default=5, help="Window width (default: 5)")
    p.add_argument("--sweep", action="store_true",
                   help="Evaluate every window start instead of writing one run (needs --catalog)")
    p.add_argument("--catalog", help="Catalog file for --sweep")
    p.add_argument("--qrels", help="Relevance judgments for --sweep")
    _add_param_options(p)
    _add_output_options(p, "csv")

    p = sub.add_parser("insert", help="Artificial insertion sweep")
    p.add_argument("mode", choices=[m.value for m in InsertionMode])
    p.add_argument("--users", type=int, choices=(100, 500, 1000), default=1000)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, help="Shuffle item id labels")
    _add_output_options(p, "csv")

    p = sub.add_parser("oracle", help="Exact extremes by brute-force enumeration")
    p.add_argument("--measure", choices=ORACLE_MEASURES, action="append",
                   help="Measure to extremise; repeat for several (default: all)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.8)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--log-base", type=float)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="Maximum runs enumerated")
    p.add_argument("--vocd-sweep", action="store_true",
                   help="Max VoCD over all runs and all similar-pair subsets")
    _add_output_options(p, "csv")
    return parser


def _params(args: argparse.Namespace, check_k: bool = True) -> EvalParams:
    params = load_params(args.config) if args.config else EvalParams()
    if not check_k:
        params = EvalParams.model_validate({**params.model_dump(), "k": None})
    return params.with_overrides(
        k=getattr(args, "k", None) if check_k else None,
        gamma=getattr(args, "gamma", None),
        alpha=getattr(args, "alpha", None),
        beta=getattr(args, "beta", None),
        log_base=getattr(args, "log_base", None),
        bh_alpha=getattr(args, "bh_alpha", None),
    )


def _similarity(params: EvalParams, embeddings: Optional[str], parser: RunParser) -> SimilarityProvider:
    if embeddings:
        return SimilarityProvider(
            variant=SimilarityVariant.EMBEDDINGS,
            embeddings=parser.parse_embeddings(embeddings),
            alpha=params.alpha,
            beta=params.beta,
        )
    if params.alpha < 2.0:
        logger.warning("--alpha has no effect without --embeddings; all pairs are similar")
    return SimilarityProvider(alpha=params.alpha, beta=params.beta)


def cmd_eval(args: argparse.Namespace, writer: ReportWriter) -> int:
    params = _params(args)
    parser = RunParser()
    evaluator = FairnessEvaluator(params, _similarity(params, args.embeddings, parser), strict=args.strict)
    names = [name for name, _ in args.run]
    if len(set(names)) != len(names):
        raise RunValidationError(f"system names must be unique, got {names}", "<command line>")
    reports = evaluator.evaluate_files(dict(args.run), args.catalog, args.qrels)
    if len(reports) == 1:
        content = writer.report(next(iter(reports.values())), args.format)
    else:
        content = writer.score_matrix(evaluator.score_matrix(reports), args.format)
    writer.to_file(content, args.output)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace, writer: ReportWriter) -> int:
    params = _params(args)
    reports = all_bounds(args.k, args.m * args.rounds, args.n, params.beta, params.log_base)
    writer.to_file(writer.bounds(reports, args.format), args.output)
    return EXIT_OK


def cmd_correlate(args: argparse.Namespace, writer: ReportWriter) -> int:
    params = _params(args)
    scores = RunParser().parse_score_matrix(args.scores)
    matrix = correlation_matrix(scores, params.bh_alpha)
    writer.to_file(writer.correlation(matrix, args.format), args.output)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, writer: ReportWriter) -> int:
    parser = RunParser()
    generator = Generator(args.generator)
    mode = RecommendationMode(args.mode)
    if args.catalog:
        catalog = parser.parse_catalog(args.catalog)
    elif args.items:
        catalog = ItemCatalog.from_range(args.items)
    else:
        raise RunValidationError("synth needs --items or --catalog", "<command line>")
    exclusions = parser.parse_exclusions(args.exclusions, catalog) if args.exclusions else None
    if args.users is None:
        raise RunValidationError("synth needs --users", "<command line>")

    if args.table:
        if args.catalog:
            raise RunValidationError("--table uses synthetic ids; pass --items, not --catalog", "<command line>")
        evaluator = FairnessEvaluator(_params(args, check_k=False))
        rows = endpoint_table(args.table, args.users, catalog.n, mode, evaluator, exclusions)
        writer.to_file(writer.endpoints(rows, args.format), args.output)
        return EXIT_OK

    if args.k is None:
        raise RunValidationError("synth needs --k unless --table is given", "<command line>")
    run = generate(generator, args.k, UserSet.from_range(args.users), catalog, mode, exclusions)
    writer.to_file(format_run(run), args.output)
    return EXIT_OK


def cmd_window(args: argparse.Namespace, writer: ReportWriter) -> int:
    parser = RunParser()
    catalog = parser.parse_catalog(args.catalog) if args.catalog else None
    deep = parser.parse_run(args.run, catalog=catalog)
    if not args.sweep:
        writer.to_file(format_run(sliding_window(deep, args.start, args.width)), args.output)
        return EXIT_OK
    if catalog is None:
        raise RunValidationError("window --sweep needs --catalog", "<command line>")
    qrels = parser.parse_qrels(args.qrels) if args.qrels else None
    evaluator = FairnessEvaluator(_params(args, check_k=False))
    reports = {
        f"window@{start}": evaluator.evaluate(
            sliding_window(deep, start, args.width), catalog, qrels, source=f"window@{start}"
        )
        for start in range(1, deep.k - args.width + 2)
    }
    writer.to_file(writer.score_matrix(evaluator.score_matrix(reports), args.format), args.output)
    return EXIT_OK


def cmd_insert(args: argparse.Namespace, writer: ReportWriter) -> int:
    state = InsertionState(m=args.users, k=args.k, mode=InsertionMode(args.mode), seed=args.seed)
    points = insertion_sweep(state)
    writer.to_file(writer.sweep(points, args.format), args.output)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, writer: ReportWriter) -> int:
    if args.vocd_sweep:
        best = vocd_similarity_sweep(args.k, args.m, args.n, args.beta, args.rounds, args.cap)
        writer.to_file(f"measure,max_value\nvocd_ori,{best!r}\n", args.output)
        return EXIT_OK
    measures = args.measure or list(ORACLE_MEASURES)
    spec = EnumerationSpec(
        k=args.k, m=args.m, n=args.n, rounds=args.rounds, measure=measures[0],
        gamma=args.gamma, beta=args.beta, log_base=args.log_base, cap=args.cap,
    )
    results = enumerate_all_extremes(spec, measures)
    writer.to_file(writer.extremes(list(results.values()), args.format), args.output)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "bounds": cmd_bounds,
    "correlate": cmd_correlate,
    "synth": cmd_synth,
    "window": cmd_window,
    "insert": cmd_insert,
    "oracle": cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI.

    Returns:
        Exit code: 0 success, 1 validation error, 2 degenerate
        normalisation, 3 oracle space too large
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    try:
        return COMMANDS[args.command](args, ReportWriter())
    except NormalizationDegenerate as e:
        logger.error(f"Degenerate normalisation: {e}")
        return EXIT_DEGENERATE
    except SpaceTooLarge as e:
        logger.error(f"Search space too large: {e}")
        return EXIT_SPACE_TOO_LARGE
    except (RunValidationError, PoolExhausted) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        logger.error(f"File not found: {e}")
        return EXIT_VALIDATION
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
