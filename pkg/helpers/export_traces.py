"""Write synthetic per-slice traffic traces to a CSV usable as ``slices.trace_path``."""

import argparse
import logging

from slice_orch.env import gen_traffic, write_traces
from slice_orch.harness import load_config


def main():
    parser = argparse.ArgumentParser(description="Generate diurnal traffic traces for every configured slice")
    parser.add_argument("-o", "--output", default="traces.csv", help="Output CSV path (default: traces.csv)")
    parser.add_argument("-n", "--num-days", type=int, default=None, help="Days of traffic (default: train_days + eval_episodes)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: training.seed from config)")
    parser.add_argument("-c", "--config", default=None, help="YAML experiment config (default: packaged default)")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="[%(asctime)s][%(name)s] %(levelname)s %(message)s")

    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.training.seed
    days = args.num_days or config.training.train_days + config.training.eval_episodes
    horizon = config.env.slots_per_episode
    traces = [gen_traffic(spec, days * horizon, seed, horizon) for spec in config.slices.specs()]
    write_traces(args.output, traces)


if __name__ == "__main__":
    main()
