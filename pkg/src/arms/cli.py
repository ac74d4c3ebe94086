"""Command-line entry point: ``bench <experiment> [options]``."""

import argparse
import sys

from .bench import EXPERIMENTS, BenchConfig, run, write_rows


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from err


def _name_list(text):
    return [v.strip().lower() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="bench", description="Gradient-estimator experiments for binary latent variables.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--estimators", type=_name_list, help="comma-separated estimator names")
    parser.add_argument("--n", dest="n_list", type=_int_list, help="comma-separated sample counts")
    parser.add_argument("--steps", type=int, default=50_000, help="maximum optimisation steps (toy)")
    parser.add_argument("--lr", type=float, default=None, help="learning rate (toy)")
    parser.add_argument("--replicates", type=int, default=None, help="Monte Carlo replicates or draws per cell")
    parser.add_argument("--probe-every", type=int, default=50, help="steps between variance probes (toy)")
    parser.add_argument("--instances", type=int, default=50, help="random instances (unbiasedness)")
    parser.add_argument("--model", dest="model_path", help="JSON model file (msb-compare)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", dest="output_path", help="output file; stdout when omitted")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    kwargs = dict(
        experiment=args.experiment,
        estimators=args.estimators,
        n_list=args.n_list,
        seed=args.seed,
        steps=args.steps,
        mc_replicates=args.replicates,
        output_path=args.output_path,
        format=args.format,
        probe_every=args.probe_every,
        instances=args.instances,
        model_path=args.model_path,
    )
    if args.lr is not None:
        kwargs["learning_rate"] = args.lr
    try:
        config = BenchConfig(**kwargs)
        rows, status = run(config)
    except (ValueError, OSError) as err:
        print(f"bench: error: {err}", file=sys.stderr)
        return 2
    text = write_rows(rows, config.output_path, config.format)
    if config.output_path is None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
