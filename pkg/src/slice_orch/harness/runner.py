"""Multi-slice episode rollouts: per-slice policies, switching guards and the feasibility layer."""

import logging
from dataclasses import dataclass
from functools import cached_property

from ..agent import AgentState, act
from ..baseline import GridPolicyTable, baseline_act, model_based_act, project_actions
from ..common import make_rng
from ..coordination import CoordState, NoisyModifier, coordinate, fixed_beta_actions
from ..coordination.coordinator import Modifier
from ..core import Action, Episode, PolicySource, ResourceVector, SliceSpec, Transition
from ..env import SlicingNetwork, TrafficTrace, gen_traffic, read_traces
from ..safety import CostValueEstimator, SafetyConfig, SafetyGuard
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

POLICY_KINDS = ("learned", "baseline", "model-based")


@dataclass(frozen=True)
class RunMode:
    """How a run guards and reconciles the slices' actions."""

    name: str = "full"
    switch_mode: str | None = None
    feasibility: str = "coordinate"
    est_noise_std: float = 0.0
    md_noise_std: float = 0.0
    behavior_cloning: bool = True
    freeze_lambda: bool = False


ABLATION_MODES = {
    "full": RunMode("full"),
    "NB": RunMode("NB", switch_mode="never"),
    "NE": RunMode("NE", switch_mode="reactive"),
    "projection": RunMode("projection", feasibility="projection"),
    "est-noise": RunMode("est-noise", est_noise_std=1.0),
    "md-noise": RunMode("md-noise", md_noise_std=1.0),
    "onrl": RunMode(
        "onrl",
        switch_mode="never",
        feasibility="projection",
        behavior_cloning=False,
        freeze_lambda=True,
    ),
}


@dataclass
class SlicePolicy:
    spec: SliceSpec
    kind: str
    table: GridPolicyTable | None = None
    agent: AgentState | None = None
    estimator: CostValueEstimator | None = None
    modifier: Modifier | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"policy kind must be one of {POLICY_KINDS}, got {self.kind!r}")
        if self.kind in ("learned", "baseline") and self.table is None:
            raise ValueError(f"slice {self.spec.id}: a {self.kind} policy needs a baseline table")
        if self.kind == "learned" and self.agent is None:
            raise ValueError(f"slice {self.spec.id}: a learned policy needs an agent")


class Experiment:
    """Slices, traces and simulator built from one config."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.seed = config.training.seed
        self.specs = config.slices.specs()
        self.horizon = config.env.slots_per_episode

    @cached_property
    def traces(self) -> dict[int, TrafficTrace]:
        cfg = self.config
        if cfg.slices.trace_path:
            return read_traces(cfg.slices.trace_path, self.specs)
        days = cfg.training.train_days + cfg.training.eval_episodes
        return {spec.id: gen_traffic(spec, days * self.horizon, self.seed, self.horizon) for spec in self.specs}

    def network(self) -> SlicingNetwork:
        return SlicingNetwork(self.config.env, self.specs, self.traces, self.seed)

    @property
    def capacities(self) -> ResourceVector:
        return ResourceVector.from_array(self.config.env.capacities)

    def training_day(self, counter: int) -> tuple[int, int]:
        """(trace day, noise variant) of the counter-th training episode."""
        days = self.config.training.train_days
        return counter % days, 1 + counter // days

    def eval_day(self, index: int) -> int:
        return self.config.training.train_days + index

    def safety_config(self, mode: RunMode) -> SafetyConfig:
        base = self.config.safety
        return SafetyConfig(
            eta=base.eta,
            n_samples=base.n_samples,
            mode=mode.switch_mode or base.mode,
            est_noise_std=max(base.est_noise_std, mode.est_noise_std),
        )


def _propose(policy: SlicePolicy, guard: SafetyGuard | None, state, env_config, explore: bool, level: float):
    if policy.kind == "learned":
        if guard.check(state):
            return baseline_act(policy.table, state), PolicySource.BASELINE
        return act(policy.agent, state, explore)[0], PolicySource.LEARNED
    if policy.kind == "baseline":
        return baseline_act(policy.table, state), PolicySource.BASELINE
    return model_based_act(state, policy.spec, env_config, level), PolicySource.BASELINE


def run_joint_episode(
    exp: Experiment,
    network: SlicingNetwork,
    policies: list[SlicePolicy],
    mode: RunMode,
    day: int,
    variant: int = 0,
    explore: bool = True,
    coord: CoordState | None = None,
    fixed_beta: ResourceVector | None = None,
) -> list[Episode]:
    """Run one episode for every slice at once and return one Episode per slice."""
    cfg = exp.config
    states = network.reset(day, variant)
    safety_cfg = exp.safety_config(mode)
    guards = [
        SafetyGuard(
            safety_cfg,
            p.estimator,
            network.horizon,
            p.spec.sla_threshold,
            noise_rng=make_rng(exp.seed, "est-noise", day, variant, p.spec.id),
        )
        if p.kind == "learned"
        else None
        for p in policies
    ]
    modifiers: list[Modifier] = [p.modifier for p in policies]
    if mode.md_noise_std > 0:
        modifiers = [
            NoisyModifier(m, mode.md_noise_std, make_rng(exp.seed, "md-noise", day, variant, p.spec.id))
            for m, p in zip(modifiers, policies)
        ]
    use_modifiers = all(m is not None for m in modifiers)
    caps = exp.capacities

    transitions: list[list[Transition]] = [[] for _ in policies]
    rounds_log: list[int] = []
    while not network.done:
        proposed: list[Action] = []
        sources: list[PolicySource] = []
        for policy, guard, state in zip(policies, guards, states):
            action, source = _propose(policy, guard, state, cfg.env, explore, cfg.baseline.model_based_level)
            proposed.append(action)
            sources.append(source)

        if fixed_beta is not None and use_modifiers:
            executed = fixed_beta_actions(states, proposed, modifiers, fixed_beta, caps)
            rounds = 1
        elif mode.feasibility == "coordinate" and use_modifiers and coord is not None:
            result = coordinate(states, proposed, modifiers, coord, caps)
            executed, rounds = result.actions, result.rounds
        else:
            executed, rounds = project_actions(proposed, caps), 0
        rounds_log.append(rounds)

        results = network.step(executed)
        for i, res in enumerate(results):
            transitions[i].append(
                Transition(states[i], executed[i], res.reward, res.cost, sources[i], res.perf, proposed=proposed[i])
            )
        states = [res.state for res in results]

    episodes = []
    for i, policy in enumerate(policies):
        truncation = guards[i].truncation_slot if guards[i] is not None else None
        episodes.append(
            Episode(
                transitions[i],
                policy.spec.sla_threshold,
                truncation,
                slice_id=policy.spec.id,
                coord_rounds=list(rounds_log),
            )
        )
    logger.debug(
        "Episode day %d variant %d: costs %s",
        day,
        variant,
        ", ".join(f"{ep.mean_cost:.4f}" for ep in episodes),
    )
    return episodes
