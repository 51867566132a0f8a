#!/usr/bin/env python3
"""
Command-line interface for the private ranking aggregation simulator.

    python src/cli.py generate --m 15 --n 100 --theta 0.25 --seed 7 --out data/profiles/mallows.csv
    python src/cli.py aggregate --method ra --in data/profiles/mallows.csv
    python src/cli.py privacy --epsilon 1 --delta 1e-4 --k 1 --n 600 --m 4 --central
    python src/cli.py run --method ddp-helnaksort --m 4 --n 100 --theta 1 --epsilon 1 --reps 300
    python src/cli.py sweep --config configs/method_comparison.ini --out data/results/fig_methods.csv
"""

import argparse
import logging
import sys

import pandas as pd

from aggregation import hra_aggregate, kemeny_optimal, ra_aggregate
from config import DATAGEN_CONFIG, EXPERIMENT_CONFIG, LOG_LEVEL, OUTPUT_CONFIG, PRIVACY_CONFIG
from datagen import MallowsConfig, load_profile, sample_mallows, save_profile
from errors import InvalidArgumentError, RankAggError
from experiments import (
    ExperimentConfig, ExperimentRunner, load_dataset, plot_frame, run_once,
    load_sweep_config, resolve_output, write_results,
)
from privacy import PrivacySpec, amplification_report, local_epsilon_for_central
from protocol import save_batch
from rankings import Ranking, average_kendall, borda_ranking, tally

logger = logging.getLogger(__name__)


def _parse_reference(text):
    if text is None:
        return None
    try:
        order = tuple(int(a) for a in text.split(","))
    except ValueError:
        raise InvalidArgumentError(f"reference must be comma-separated integers, got '{text}'")
    return Ranking(order)


def cmd_generate(args):
    cfg = MallowsConfig(m=args.m, n=args.n, theta=args.theta,
                        reference=_parse_reference(args.reference), seed=args.seed)
    profile = sample_mallows(cfg)
    save_profile(profile, args.out)
    print(f"✅ Saved {len(profile)} rankings (m={cfg.m}, theta={cfg.theta}) to {args.out}")
    return 0


def cmd_aggregate(args):
    profile = load_profile(args.input)
    if args.method == "kemeny":
        ranking, distance = kemeny_optimal(profile)
    else:
        counts = tally(profile)
        aggregate = {"ra": ra_aggregate, "hra": hra_aggregate, "borda": borda_ranking}[args.method]
        ranking = aggregate(counts)
        distance = average_kendall(ranking, profile)

    print(f"ranking={','.join(str(a) for a in ranking.order)}")
    print(f"distance={distance:.6f}")
    if args.out:
        pd.DataFrame([{"method": args.method, "ranking": " ".join(map(str, ranking.order)),
                       "distance": distance}]).to_csv(args.out, index=False)
    return 0


def cmd_privacy(args):
    if args.central:
        if args.k != 1:
            raise RankAggError("--central converts a single-query budget; use --k 1")
        spec = local_epsilon_for_central(args.epsilon, args.delta, args.n, args.m)
    else:
        spec = PrivacySpec(epsilon=args.epsilon, delta=args.delta, k_queries=args.k)

    report = amplification_report(spec, args.n, args.m).as_dict()
    table = pd.DataFrame([{"quantity": key, "value": value} for key, value in report.items()])
    print(table.to_string(index=False))
    print()
    for key, value in report.items():
        print(f"{key}={'' if value is None else value}")
    if args.out:
        pd.DataFrame([report]).to_csv(args.out, index=False)
    return 0


def _experiment_config(args):
    return ExperimentConfig(
        method=args.method,
        m=args.m,
        n=args.n,
        theta=args.theta,
        profile_path=args.profile,
        epsilon=args.epsilon,
        epsilon_is_central=None if args.epsilon_scope is None else args.epsilon_scope == "central",
        delta=args.delta,
        k_queries=args.k,
        repetitions=EXPERIMENT_CONFIG["desk_repetitions"] if args.desk else args.reps,
        master_seed=args.seed,
    )


def _write_table(df, out):
    if out:
        write_results(df, out)
        print(f"✅ Saved {len(df)} result rows to {resolve_output(out)}", file=sys.stderr)
    else:
        df.to_csv(sys.stdout, index=False, float_format=OUTPUT_CONFIG["float_format"])


def cmd_run(args):
    cfg = _experiment_config(args)
    runner = ExperimentRunner(n_jobs=args.jobs, timings=args.timings)
    df = runner.run_sweep([cfg])
    if runner.failures:
        print(f"❌ Run failed: {runner.failures[0][1]}", file=sys.stderr)
        return 1
    _write_table(df, args.out)

    result = runner.results[0]
    if args.distances:
        path = resolve_output(args.distances)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({"rep": range(len(result.distances)), "distance": result.distances}).to_csv(
            path, index=False, float_format=OUTPUT_CONFIG["float_format"])
    if args.plot_data:
        write_results(plot_frame(runner.results, x=args.plot_x), args.plot_data)
    if args.dump_answers:
        capture = {}
        run_once(cfg, 0, load_dataset(cfg), capture=capture)
        if "batch" not in capture:
            print(f"⚠️ {cfg.method} does not go through the shuffler; no answers dumped", file=sys.stderr)
        else:
            save_batch(capture["batch"], resolve_output(args.dump_answers))
    return 0


def cmd_sweep(args):
    repetitions = EXPERIMENT_CONFIG["desk_repetitions"] if args.desk else None
    configs = load_sweep_config(args.config, seed=args.seed, repetitions=repetitions)
    runner = ExperimentRunner(n_jobs=args.jobs, timings=args.timings)
    df = runner.run_sweep(configs)
    _write_table(df, args.out)
    if args.plot_data:
        write_results(plot_frame(runner.results, x=args.plot_x), args.plot_data)
    if runner.failures:
        print(f"⚠️ {len(runner.failures)} of {len(configs)} sweep cells failed:", file=sys.stderr)
        for cfg, message in runner.failures:
            print(f"  {cfg.name or cfg.method}: {message}", file=sys.stderr)
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(description="Private ranking aggregation simulator")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Sample a Mallows profile to CSV")
    gen.add_argument("--m", type=int, default=DATAGEN_CONFIG["default_m"])
    gen.add_argument("--n", type=int, default=DATAGEN_CONFIG["default_n"])
    gen.add_argument("--theta", type=float, default=DATAGEN_CONFIG["default_theta"])
    gen.add_argument("--reference", help="Comma-separated reference order (default: identity)")
    gen.add_argument("--seed", type=int, default=DATAGEN_CONFIG["default_seed"])
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_generate)

    agg = sub.add_parser("aggregate", help="Aggregate a profile CSV without noise")
    agg.add_argument("--method", choices=["ra", "hra", "kemeny", "borda"], default="ra")
    agg.add_argument("--in", dest="input", required=True)
    agg.add_argument("--seed", type=int, default=None, help="Unused; aggregation is deterministic")
    agg.add_argument("--out", help="Also write the result as CSV")
    agg.set_defaults(handler=cmd_aggregate)

    priv = sub.add_parser("privacy", help="Noise scale and shuffle amplification")
    priv.add_argument("--epsilon", type=float, required=True)
    priv.add_argument("--delta", type=float, default=PRIVACY_CONFIG["default_delta"])
    priv.add_argument("--k", type=int, default=1)
    priv.add_argument("--n", type=int, required=True)
    priv.add_argument("--m", type=int, required=True)
    priv.add_argument("--central", action="store_true", help="Treat --epsilon as the central target")
    priv.add_argument("--seed", type=int, default=None, help="Unused; accounting is deterministic")
    priv.add_argument("--out", help="Also write the report as CSV")
    priv.set_defaults(handler=cmd_privacy)

    run = sub.add_parser("run", help="Run a single experiment")
    run.add_argument("--method", choices=EXPERIMENT_CONFIG["methods"], required=True)
    run.add_argument("--m", type=int, default=4)
    run.add_argument("--n", type=int, default=DATAGEN_CONFIG["default_n"])
    run.add_argument("--theta", type=float, default=DATAGEN_CONFIG["default_theta"])
    run.add_argument("--profile", help="Profile CSV instead of Mallows data")
    run.add_argument("--epsilon", type=float, default=1.0)
    run.add_argument("--epsilon-scope", choices=["central", "local"])
    run.add_argument("--delta", type=float, default=PRIVACY_CONFIG["default_delta"])
    run.add_argument("--k", help="Queries per agent: integer, 'm' or 'max'")
    run.add_argument("--reps", type=int, default=EXPERIMENT_CONFIG["default_repetitions"])
    run.add_argument("--desk", action="store_true", help="Quick check with the reduced repetition count")
    run.add_argument("--seed", type=int, default=EXPERIMENT_CONFIG["default_seed"])
    run.add_argument("--out")
    run.add_argument("--jobs", type=int, default=None)
    run.add_argument("--timings", action="store_true", help="Fill the seconds column")
    run.add_argument("--distances", help="Write per-repetition distances to this CSV")
    run.add_argument("--plot-data", help="Write long-format plot data to this CSV")
    run.add_argument("--plot-x", default="k")
    run.add_argument("--dump-answers", help="Write the first repetition's shuffled answers to this CSV")
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", help="Run every cell of a sweep config file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--seed", type=int, default=None, help="Override the seed of every cell")
    sweep.add_argument("--desk", action="store_true", help="Run every cell with the reduced repetition count")
    sweep.add_argument("--out")
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--timings", action="store_true")
    sweep.add_argument("--plot-data")
    sweep.add_argument("--plot-x", default="k")
    sweep.set_defaults(handler=cmd_sweep)

    return parser


def main(argv=None):
    """Main function to run the CLI"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except RankAggError as e:
        logger.error(str(e))
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\n🛑 Interrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
