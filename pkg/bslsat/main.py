import argparse
import logging
import sys
import time

from .bench import has_mismatch, run_bench, summarize, write_csv
from .config import ENCODINGS, SET_DIALECTS, STRATEGIES, Config
from .errors import BslError
from .generators import FAMILIES, write_random_benchmarks
from .helpers import get_timestamp, to_json
from .logger import setup_logging, verbosity_level
from .parser import parse_file
from .qbf import write_qbf_benchmarks
from .solver import BslSolver

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


def _solver_options(parser):
    parser.add_argument("--config", help="JSON config file (default data/config/bslsat.json)")
    parser.add_argument("--encoding", choices=ENCODINGS)
    parser.add_argument("--set-dialect", choices=SET_DIALECTS)
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--solver", help="SMT solver command (default: $BSL_SOLVER, z3, cvc5, bitwuzla)")
    parser.add_argument("--solver-arg", action="append", default=[],
                        help="argument passed to the solver, repeatable")
    parser.add_argument("--timeout", type=float, help="solver timeout in seconds")
    parser.add_argument("--no-tighten", action="store_true",
                        help="use plain location bounds instead of SL-graph tightening")
    parser.add_argument("--oracle", action="store_true",
                        help="decide by bounded model enumeration instead of SMT (small inputs)")
    parser.add_argument("--verify-model", action="store_true",
                        help="check every witness against the input formula")


def build_parser():
    parser = argparse.ArgumentParser(prog="bslsat",
                                     description="Satisfiability and entailment for boolean separation logic")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--log-file", help="also write the log to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve one .bsl or .smt2 query")
    solve.add_argument("file")
    _solver_options(solve)
    solve.add_argument("--model", action="store_true", help="print the witness as JSON")
    solve.add_argument("--stats", action="store_true", help="print translation and solver statistics")
    solve.add_argument("--dump-smt", metavar="PATH", help="write the SMT-LIB script here")
    solve.add_argument("--dump-slgraph", metavar="PATH", help="write the SL-graph as DOT here")

    bench = commands.add_parser("bench", help="solve every query of a directory")
    bench.add_argument("directory")
    _solver_options(bench)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--csv", metavar="PATH", help="write the report here instead of stdout")

    qbf = commands.add_parser("gen-qbf", help="write reduced random QBFs with known status")
    qbf.add_argument("directory")
    qbf.add_argument("--count", type=int, default=100)
    qbf.add_argument("--seed", type=int)
    qbf.add_argument("--max-vars", type=int, default=4)

    rand = commands.add_parser("gen-random", help="write random formulas or entailments")
    rand.add_argument("directory")
    rand.add_argument("--count", type=int, default=100)
    rand.add_argument("--seed", type=int)
    rand.add_argument("--family", choices=sorted(FAMILIES))
    rand.add_argument("--vars", type=int, default=4)
    rand.add_argument("--depth", type=int, default=4)
    return parser


def _is_mismatch(expected, got):
    return expected in ("sat", "unsat") and got in ("sat", "unsat") and expected != got


def cmd_solve(args, config):
    query = parse_file(args.file)
    solver = BslSolver(config)
    start = time.time()
    result = solver.solve_query(query, oracle=args.oracle, dump_smt=args.dump_smt,
                                dump_slgraph=args.dump_slgraph)
    print(result.answer)
    if args.model and result.model is not None:
        print(result.model.to_json())
    if config.verify_model and result.verified is not None:
        print(f"model verified: {str(result.verified).lower()}")
    if args.stats:
        print(to_json({
            "file": args.file,
            "timestamp": get_timestamp(),
            "status": result.status,
            "wall_time": round(time.time() - start, 6),
            "translation": result.stats,
            "solver": solver.get_stats(),
        }))
    if result.verified is False:
        logger.error(f"Witness for {args.file} does not satisfy the query")
        return EXIT_ERROR
    if _is_mismatch(query.expected_status, result.status):
        logger.error(f"{args.file}: expected {query.expected_status}, got {result.status}")
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_bench(args, config):
    rows = run_bench(args.directory, config, jobs=max(1, args.jobs), oracle=args.oracle)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            write_csv(rows, f)
        logger.info(f"Bench report written to {args.csv}")
    else:
        sys.stdout.write(write_csv(rows))
    print(summarize(rows))
    return EXIT_MISMATCH if has_mismatch(rows) else EXIT_OK


def cmd_gen_qbf(args):
    paths = write_qbf_benchmarks(args.directory, args.count, args.seed, args.max_vars)
    print(f"{len(paths)} files written to {args.directory}")
    return EXIT_OK


def cmd_gen_random(args):
    paths = write_random_benchmarks(args.directory, args.count, args.seed, args.family,
                                    args.vars, args.depth)
    print(f"{len(paths)} files written to {args.directory}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.log_file, verbosity_level(args.verbose))
    try:
        if args.command == "gen-qbf":
            return cmd_gen_qbf(args)
        if args.command == "gen-random":
            return cmd_gen_random(args)
        config = Config.from_args(args)
        if not args.verbose or config.log_file != args.log_file:
            level = verbosity_level(args.verbose) if args.verbose else config.log_level
            setup_logging(config.log_file, level)
        if args.command == "solve":
            return cmd_solve(args, config)
        return cmd_bench(args, config)
    except BslError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Error running {args.command}: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
