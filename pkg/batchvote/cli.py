"""Command-line surface: point queries, figure tables, simulation and verification."""

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from batchvote.config import DEFAULT_POPULATION, K_MAX, LOG_FORMAT, LOG_LEVEL, WORKERS
from batchvote.errors import BatchVoteError
from batchvote.ic import batch_bounds, ic_interval
from batchvote.models import McConfig, MechanismSpec, OutputFormat, SweepConfig, validate_params
from batchvote.services.correctness import exact_correctness
from batchvote.services.greedy import run_mechanism, sample_world
from batchvote.services.oracle import brute_force_correctness, mc_correctness
from batchvote.services.sweeps import FIGURES, build_table, write_table
from batchvote.services.verification import FAST, FULL, check_names, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VERIFY = 4


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _spec(args: argparse.Namespace) -> MechanismSpec:
    return MechanismSpec.from_name(args.mechanism, k=args.k, j=args.j)


def cmd_ic_interval(args: argparse.Namespace) -> int:
    interval = ic_interval(args.k, args.q)
    print(f"k={interval.k} lower={_fmt(interval.lower)} upper={_fmt(interval.upper)}")
    return EXIT_OK


def cmd_batch_bounds(args: argparse.Namespace) -> int:
    bounds = batch_bounds(validate_params(args.mu, args.q), k_max=args.k_max)
    if bounds is None:
        print("none (mu >= q)")
    else:
        print(f"min_k={bounds.min_k} max_k={bounds.max_k}")
    return EXIT_OK


def cmd_correctness(args: argparse.Namespace) -> int:
    params = validate_params(args.mu, args.q, args.population)
    if args.mechanism == "all":
        specs = [MechanismSpec.sequential(), MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.greedy()]
        if args.k is not None:
            specs.append(MechanismSpec.single_batch(args.k))
    else:
        specs = [_spec(args)]
    evaluate = brute_force_correctness if args.method == "brute-force" else exact_correctness
    for spec in specs:
        report = evaluate(spec, params)
        line = f"{spec.label} value={_fmt(report.value)} method={report.method.value}"
        if report.batches_reached is not None:
            line += f" batches_reached={report.batches_reached}"
        print(line)
        for note in report.notes:
            print(f"  note: {note}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = SweepConfig(
        q_values=args.q,
        mu_grid=(args.mu_start, args.mu_stop, args.mu_step),
        population=args.population,
        output_format=OutputFormat(args.format),
        output_path=args.output,
        k_max_table=args.k_max_table,
    )
    table = build_table(args.figure, cfg, workers=args.workers)
    if cfg.output_path is None:
        write_table(table, cfg.output_format, sys.stdout)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            write_table(table, cfg.output_format, fh)
        logger.info("Wrote %d rows to %s.", len(table), cfg.output_path)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    params = validate_params(args.mu, args.q, args.population)
    spec = _spec(args)
    cfg = McConfig(trials=args.trials, seed=args.seed)
    report = mc_correctness(spec, params, cfg, workers=args.workers)
    print(report.model_dump_json(indent=2))
    if args.trace:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed])))
        quality, signals = sample_world(params, rng)
        trace = run_mechanism(spec, params, quality, signals, seed=cfg.seed)
        print(trace.model_dump_json(indent=2, exclude={"signals"}))
        print("signals: " + "".join(s.value for s in signals))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_suite(args.level, only=args.check)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name}: {result.detail} ({result.seconds:.2f}s)")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    if failed:
        print("failed invariants: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser, population: bool = True) -> None:
    p.add_argument("--mu", type=float, required=True, help="Prior P(quality is good)")
    p.add_argument("--q", type=float, required=True, help="Signal precision in (0.5, 1)")
    if population:
        p.add_argument("--population", type=int, default=DEFAULT_POPULATION, help="Queue length I")


def _add_mechanism(p: argparse.ArgumentParser, choices: Sequence[str]) -> None:
    p.add_argument("--mechanism", choices=choices, required=True)
    p.add_argument("--k", type=int, default=None, help="Batch size of the single-batch mechanism")
    p.add_argument("--j", type=int, default=None, help="Horizon of greedy voting (omit for unbounded)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchvote", description="Incentive-compatible batch voting.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ic-interval", help="Priors for which a size-K batch is incentive-compatible")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(func=cmd_ic_interval)

    p = sub.add_parser("batch-bounds", help="Smallest and largest IC batch size at a prior")
    _add_params(p, population=False)
    p.add_argument("--k-max", type=int, default=K_MAX, help="Search cap (default BATCHVOTE_KMAX)")
    p.set_defaults(func=cmd_batch_bounds)

    p = sub.add_parser("correctness", help="Exact correctness of a mechanism")
    _add_params(p)
    _add_mechanism(p, ("seq", "single", "greedy", "all"))
    p.add_argument("--method", choices=("exact", "brute-force"), default="exact")
    p.set_defaults(func=cmd_correctness)

    p = sub.add_parser("sweep", help="Emit a figure table")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--q", type=float, nargs="+", default=[0.6, 0.7, 0.8])
    p.add_argument("--mu-start", type=float, default=0.005)
    p.add_argument("--mu-stop", type=float, default=0.995)
    p.add_argument("--mu-step", type=float, default=0.005)
    p.add_argument("--population", type=int, default=DEFAULT_POPULATION)
    p.add_argument("--k-max-table", type=int, default=25, help="Largest K in the intervals table")
    p.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    p.add_argument("--output", default=None, help="Output file (default standard output)")
    p.add_argument("--workers", type=int, default=WORKERS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of correctness")
    _add_params(p)
    _add_mechanism(p, ("seq", "single", "greedy"))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="Also print one sampled run")
    p.add_argument("--workers", type=int, default=WORKERS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Run the invariant suites")
    p.add_argument("--level", choices=(FAST, FULL), default=FAST)
    p.add_argument("--check", action="append", choices=check_names(), help="Run only the named check (repeatable)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else LOG_LEVEL,
        format=LOG_FORMAT,
        datefmt="%H:%M:%S",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (BatchVoteError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
