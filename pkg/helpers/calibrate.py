"""Print the grid-search baseline per traffic bucket, to check that the simulator constants leave room between idle and peak."""

import argparse

from slice_orch.baseline import build_table
from slice_orch.core import reward_from_action, usage_pct
from slice_orch.harness import load_config


def main():
    parser = argparse.ArgumentParser(description="Show baseline actions, usage and cost for each slice and traffic bucket")
    parser.add_argument("-c", "--config", default=None, help="YAML experiment config (default: packaged default)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: training.seed from config)")
    args = parser.parse_args()

    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.training.seed
    for spec in config.slices.specs():
        table = build_table(config.env, spec, config.baseline, seed)
        print(f"== slice {spec.id} ({spec.kind.tag.value}, SLA {spec.sla_threshold}) ==")
        for b, action in enumerate(table.actions):
            usage = usage_pct(reward_from_action(action))
            flag = "" if table.feasible[b] else "  INFEASIBLE"
            print(
                f"  f <= {table.edges[b + 1]:.3f}: usage {usage:6.2f}%  cost {table.mean_costs[b]:.4f}{flag}"
            )


if __name__ == "__main__":
    main()
