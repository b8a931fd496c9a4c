"""Experiment stages: collect-baseline, pretrain, train-online, evaluate, ablate, oracle.

Every stage reads its inputs from and writes its artifacts to the run
directory ``training.out_dir``; a stage whose inputs are missing fails with
MissingArtifactError naming the stage that produces them.
"""

import logging
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..agent import (
    RolloutBuffer,
    add_episode,
    bc_dataset,
    bc_pretrain,
    init_agent,
    load_agent,
    ppo_update,
    save_agent,
    update_lambda,
)
from ..baseline import KEY_DIMS, build_table, load_tables, save_tables
from ..common import make_rng, write_json
from ..coordination import (
    CoordState,
    ModifierNet,
    build_modifier_dataset,
    exponential_beta_sampler,
    load_modifier,
    save_modifier,
    train_modifier,
)
from ..core import Episode, ResourceVector
from ..env import write_traces
from ..safety import CostValueEstimator, fit_estimator, load_estimator, refit_estimator, save_estimator
from .config import ExperimentConfig, dump_config
from .experiments import run_oracle_suite
from .metrics import MetricsRecord, epoch_records, write_metrics_csv
from .persistence import load_episodes, save_episodes
from .runner import ABLATION_MODES, Experiment, RunMode, SlicePolicy, run_joint_episode

logger = logging.getLogger(__name__)

STAGES = ("collect-baseline", "pretrain", "train-online", "evaluate", "ablate", "oracle")


class RunPaths:
    def __init__(self, out_dir):
        self.root = Path(out_dir)

    @property
    def traces(self) -> Path:
        return self.root / "traces.csv"

    @property
    def tables(self) -> Path:
        return self.root / "baseline" / "tables.json"

    @property
    def baseline_episodes(self) -> Path:
        return self.root / "baseline" / "episodes.json"

    @property
    def baseline_metrics(self) -> Path:
        return self.root / "baseline" / "metrics.csv"

    def agent(self, stage: str, slice_id: int) -> Path:
        return self.root / stage / f"agent_{slice_id}.json"

    def estimator(self, stage: str, slice_id: int) -> Path:
        return self.root / stage / f"estimator_{slice_id}.json"

    def modifier(self, slice_id: int) -> Path:
        return self.root / "pretrain" / f"modifier_{slice_id}.json"

    @property
    def pretrain_report(self) -> Path:
        return self.root / "pretrain" / "report.json"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics.csv"

    def evaluation(self, policy: str) -> Path:
        return self.root / f"evaluation_{policy}.csv"

    def ablation(self, mode: str) -> Path:
        return self.root / f"ablation_{mode}.csv"

    @property
    def oracle_report(self) -> Path:
        return self.root / "oracle_report.json"

    @property
    def config(self) -> Path:
        return self.root / "config.yaml"


def _by_slice(episodes: Sequence[Episode]) -> dict[int, list[Episode]]:
    grouped: dict[int, list[Episode]] = {}
    for ep in episodes:
        grouped.setdefault(ep.slice_id, []).append(ep)
    return grouped


def collect_baseline(config: ExperimentConfig) -> list[MetricsRecord]:
    """Build the grid tables and roll the baseline on training days."""
    exp = Experiment(config)
    paths = RunPaths(config.training.out_dir)
    write_traces(paths.traces, [exp.traces[spec.id] for spec in exp.specs])

    tables = {}
    for i, spec in enumerate(exp.specs, 1):
        logger.info("[%d/%d] Building baseline table for slice %d (%s)", i, len(exp.specs), spec.id, spec.kind.tag.value)
        tables[spec.id] = build_table(config.env, spec, config.baseline, exp.seed)
    save_tables(paths.tables, tables)

    network = exp.network()
    policies = [SlicePolicy(spec, "baseline", table=tables[spec.id]) for spec in exp.specs]
    episodes: list[Episode] = []
    total = config.training.baseline_episodes
    for j in range(total):
        logger.info("[%d/%d] Baseline episode", j + 1, total)
        day = j % config.training.train_days
        episodes.extend(run_joint_episode(exp, network, policies, RunMode("baseline", feasibility="projection"), day))
    save_episodes(paths.baseline_episodes, episodes)

    records = epoch_records(_by_slice(episodes), epoch=0, transitions=total * exp.horizon)
    write_metrics_csv(paths.baseline_metrics, records)
    dump_config(paths.config, config)
    return records


def _cost_fn(network, slice_idx: int):
    return lambda state, action: network.expected_cost(slice_idx, state, action)


def pretrain(config: ExperimentConfig) -> dict:
    """Behavior cloning, estimator fitting and modifier training from the baseline log."""
    exp = Experiment(config)
    paths = RunPaths(config.training.out_dir)
    episodes = _by_slice(load_episodes(paths.baseline_episodes))
    network = exp.network()
    report: dict = {"slices": []}
    for idx, spec in enumerate(exp.specs):
        eps = episodes.get(spec.id, [])
        logger.info("[%d/%d] Pretraining slice %d on %d baseline episodes", idx + 1, len(exp.specs), spec.id, len(eps))
        agent = init_agent(config.agent, make_rng(exp.seed, "agent", spec.id))
        bc = bc_pretrain(agent, *bc_dataset(eps))
        save_agent(paths.agent("pretrain", spec.id), agent)

        est = CostValueEstimator(config.estimator, exp.seed, spec.id)
        est_stats = fit_estimator(est, eps)
        save_estimator(paths.estimator("pretrain", spec.id), est)

        rng = make_rng(exp.seed, "modifier", spec.id)
        log = [tr for ep in eps for tr in ep.transitions]
        if len(log) > config.modifier.max_pairs:
            keep = np.sort(rng.choice(len(log), size=config.modifier.max_pairs, replace=False))
            log = [log[k] for k in keep]
        cost_fn = _cost_fn(network, idx)
        data = build_modifier_dataset(
            log,
            exponential_beta_sampler(config.modifier.beta_mean),
            cost_fn,
            KEY_DIMS[spec.kind.tag],
            config.modifier.grid_resolution,
            config.modifier.betas_per_pair,
            rng,
        )
        net = ModifierNet.create(config.modifier, make_rng(exp.seed, "modifier-init", spec.id))
        mod_stats = train_modifier(net, data, cost_fn=cost_fn, rng=rng)
        save_modifier(paths.modifier(spec.id), net)

        report["slices"].append(
            {
                "slice_id": spec.id,
                "bc_initial_mse": bc.initial_mse,
                "bc_final_mse": bc.final_mse,
                "estimator_initial_loss": est_stats.initial_loss,
                "estimator_final_loss": est_stats.final_loss,
                "modifier_train_mse": mod_stats.train_mse,
                "modifier_holdout_mse": mod_stats.holdout_mse,
                "modifier_mean_gap": mod_stats.mean_gap,
                "modifier_within_tolerance": mod_stats.within_tolerance,
            }
        )
    write_json(paths.pretrain_report, report)
    dump_config(paths.config, config)
    return report


def _learned_policies(exp: Experiment, paths: RunPaths, stage: str, mode: RunMode) -> list[SlicePolicy]:
    config = exp.config
    tables = load_tables(paths.tables)
    policies = []
    for spec in exp.specs:
        if mode.behavior_cloning:
            agent = load_agent(paths.agent(stage, spec.id), config.agent, exp.seed, spec.id, stage)
        else:
            agent = init_agent(config.agent, make_rng(exp.seed, "agent", spec.id, "cold"))
        estimator = load_estimator(paths.estimator(stage, spec.id), config.estimator, exp.seed, spec.id)
        estimator.n_samples = config.safety.n_samples
        modifier = load_modifier(paths.modifier(spec.id), config.modifier)
        policies.append(SlicePolicy(spec, "learned", tables[spec.id], agent, estimator, modifier))
    return policies


def train_online(
    config: ExperimentConfig,
    mode: RunMode | None = None,
    metrics_path: Path | None = None,
    save_checkpoints: bool = True,
) -> list[MetricsRecord]:
    mode = mode or ABLATION_MODES["full"]
    exp = Experiment(config)
    paths = RunPaths(config.training.out_dir)
    policies = _learned_policies(exp, paths, "pretrain", mode)
    network = exp.network()
    coord = CoordState(config.coord)
    epe = config.episodes_per_epoch
    epochs = config.training.epochs
    records: list[MetricsRecord] = []
    transitions = 0
    counter = 0
    for epoch in range(1, epochs + 1):
        start = time.perf_counter()
        epoch_episodes: list[Episode] = []
        for _ in range(epe):
            day, variant = exp.training_day(counter)
            counter += 1
            epoch_episodes.extend(run_joint_episode(exp, network, policies, mode, day, variant, True, coord))
        grouped = _by_slice(epoch_episodes)
        for policy in policies:
            eps = grouped[policy.spec.id]
            buffer = RolloutBuffer()
            for ep in eps:
                add_episode(buffer, policy.agent, ep)
            if len(buffer):
                ppo_update(policy.agent, buffer)
            if not mode.freeze_lambda:
                update_lambda(policy.agent, eps)
            if exp.safety_config(mode).mode == "proactive":
                refit_estimator(policy.estimator, eps, config.training.estimator_refit_epochs)
        transitions += epe * exp.horizon
        elapsed = time.perf_counter() - start
        lambdas = {p.spec.id: p.agent.lam for p in policies}
        epoch_recs = epoch_records(grouped, epoch, lambdas, transitions, elapsed)
        overall = epoch_recs[-1]
        logger.info(
            "[%d/%d] %s: usage %.2f%%, violation %.2f%%, switch rate %.2f, rounds %.2f (%.1fs)",
            epoch,
            epochs,
            mode.name,
            overall.usage_pct,
            overall.violation_pct,
            overall.switch_rate,
            overall.coord_rounds,
            elapsed,
        )
        records.extend(epoch_recs)

    write_metrics_csv(metrics_path or paths.metrics, records)
    if save_checkpoints:
        for policy in policies:
            save_agent(paths.agent("online", policy.spec.id), policy.agent)
            save_estimator(paths.estimator("online", policy.spec.id), policy.estimator)
    dump_config(paths.config, config)
    return records


def _evaluation_episodes(
    exp: Experiment,
    policies: list[SlicePolicy],
    mode: RunMode,
    fixed_beta: ResourceVector | None = None,
) -> list[Episode]:
    network = exp.network()
    coord = CoordState(exp.config.coord)
    episodes = []
    total = exp.config.training.eval_episodes
    for j in range(total):
        logger.debug("[%d/%d] Evaluation episode (%s)", j + 1, total, mode.name)
        episodes.extend(
            run_joint_episode(exp, network, policies, mode, exp.eval_day(j), 0, False, coord, fixed_beta)
        )
    return episodes


def _trained_stage(paths: RunPaths, exp: Experiment) -> str:
    if all(paths.agent("online", s.id).exists() for s in exp.specs):
        return "online"
    logger.info("No online checkpoints in %s; evaluating the pretrained agents", paths.root)
    return "pretrain"


def evaluate(config: ExperimentConfig) -> dict[str, list[MetricsRecord]]:
    """Held-out episodes, no exploration, for the learned agents and both comparators."""
    exp = Experiment(config)
    paths = RunPaths(config.training.out_dir)
    tables = load_tables(paths.tables)
    learned = _learned_policies(exp, paths, _trained_stage(paths, exp), ABLATION_MODES["full"])
    runs = {
        "learned": (learned, ABLATION_MODES["full"]),
        "baseline": (
            [SlicePolicy(s, "baseline", table=tables[s.id]) for s in exp.specs],
            RunMode("baseline", feasibility="projection"),
        ),
        "model-based": (
            [SlicePolicy(s, "model-based") for s in exp.specs],
            RunMode("model-based", feasibility="projection"),
        ),
    }
    results = {}
    n_transitions = config.training.eval_episodes * exp.horizon
    for name, (policies, mode) in runs.items():
        episodes = _evaluation_episodes(exp, policies, mode)
        lambdas = {p.spec.id: p.agent.lam for p in policies if p.agent is not None}
        records = epoch_records(_by_slice(episodes), 0, lambdas, n_transitions)
        write_metrics_csv(paths.evaluation(name), records)
        overall = records[-1]
        logger.info("%s: usage %.2f%%, violation %.2f%%", name, overall.usage_pct, overall.violation_pct)
        results[name] = records
    dump_config(paths.config, config)
    return results


def ablate(config: ExperimentConfig, mode_name: str, betas: Sequence[float] = ()) -> list[MetricsRecord]:
    paths = RunPaths(config.training.out_dir)
    if mode_name == "fixed-beta":
        if not betas:
            raise ValueError("fixed-beta ablation needs at least one --beta value")
        exp = Experiment(config)
        policies = _learned_policies(exp, paths, _trained_stage(paths, exp), ABLATION_MODES["full"])
        records, beta_column = [], []
        for beta in betas:
            episodes = _evaluation_episodes(exp, policies, RunMode("fixed-beta"), ResourceVector.full(beta))
            lambdas = {p.spec.id: p.agent.lam for p in policies}
            block = epoch_records(_by_slice(episodes), 0, lambdas, config.training.eval_episodes * exp.horizon)
            logger.info("beta=%g: usage %.2f%%, violation %.2f%%", beta, block[-1].usage_pct, block[-1].violation_pct)
            records.extend(block)
            beta_column.extend([beta] * len(block))
        write_metrics_csv(paths.ablation(mode_name), records, extra={"beta": beta_column})
        dump_config(paths.config, config)
        return records
    if mode_name not in ABLATION_MODES:
        raise ValueError(f"unknown ablation mode {mode_name!r}; expected one of {sorted(ABLATION_MODES)} or fixed-beta")
    return train_online(config, ABLATION_MODES[mode_name], paths.ablation(mode_name), save_checkpoints=False)


def oracle(config: ExperimentConfig) -> dict:
    paths = RunPaths(config.training.out_dir)
    report = run_oracle_suite(config)
    write_json(paths.oracle_report, report)
    dump_config(paths.config, config)
    return report


def run_pipeline(config: ExperimentConfig, stage: str, mode: str = "full", betas: Sequence[float] = ()):
    if stage == "collect-baseline":
        return collect_baseline(config)
    if stage == "pretrain":
        return pretrain(config)
    if stage == "train-online":
        return train_online(config)
    if stage == "evaluate":
        return evaluate(config)
    if stage == "ablate":
        return ablate(config, mode, betas)
    if stage == "oracle":
        return oracle(config)
    raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
