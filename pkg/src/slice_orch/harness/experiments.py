"""Small problems with exact answers, used by the ``oracle`` stage and the slow tests.

- a stationary constrained bandit with an enumerable primal-dual optimum,
- a two-state, two-action MDP solved by dynamic programming,
- cost-to-go regression on synthetic data of known mean and spread,
- the learned modifier's objective gap against the brute-force argmin.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..agent import AgentConfig, RolloutBuffer, act_features, init_agent, log_prob, ppo_update, shaped_reward
from ..agent.lagrange import dual_step
from ..baseline import KEY_DIMS, build_table
from ..common import make_rng
from ..coordination import (
    ModifierConfig,
    ModifierNet,
    build_modifier_dataset,
    exponential_beta_sampler,
    train_modifier,
)
from ..safety import CostValueEstimator, EstimatorConfig
from .config import ExperimentConfig
from .runner import Experiment, RunMode, SlicePolicy, run_joint_episode

logger = logging.getLogger(__name__)


@dataclass
class BanditProblem:
    cheap_reward: float = -0.2
    cheap_cost: float = 0.1
    safe_reward: float = -1.0
    safe_cost: float = 0.0
    threshold: float = 0.05

    def optimum(self) -> tuple[float, float]:
        """(probability of the cheap arm, multiplier) at the constrained optimum."""
        if self.cheap_cost <= self.threshold:
            return 1.0, 0.0
        p = (self.threshold - self.safe_cost) / (self.cheap_cost - self.safe_cost)
        lam = (self.cheap_reward - self.safe_reward) / (self.cheap_cost - self.safe_cost)
        return p, lam


@dataclass
class BanditResult:
    mean_cost: float
    cheap_rate: float
    lam: float
    optimal_lam: float
    optimal_cheap_rate: float


def run_constrained_bandit(
    seed: int = 0,
    epochs: int = 300,
    pulls_per_epoch: int = 64,
    lambda_lr: float = 20.0,
    problem: BanditProblem | None = None,
) -> BanditResult:
    """Primal-dual training on one-slot episodes; the arm is the action's side of 0.5.

    Cost and multiplier are averaged over the second half of training.
    """
    problem = problem or BanditProblem()
    config = AgentConfig(
        hidden=(8,),
        actor_lr=1e-2,
        critic_lr=1e-2,
        epochs_per_update=4,
        minibatch_size=64,
        log_std_init=0.0,
        reward_scale=1.0,
        lambda_lr=lambda_lr,
    )
    agent = init_agent(config, make_rng(seed, "bandit"), state_dim=1, action_dim=1)
    x = np.ones(1)
    costs, cheap, lams = [], [], []
    for _ in range(epochs):
        buffer = RolloutBuffer()
        epoch_costs = []
        for _ in range(pulls_per_epoch):
            a, _ = act_features(agent, x, explore=True)
            is_cheap = a[0] < 0.5
            r = problem.cheap_reward if is_cheap else problem.safe_reward
            c = problem.cheap_cost if is_cheap else problem.safe_cost
            buffer.add(x, a, float(log_prob(agent, x, a)[0]), shaped_reward(r, c, agent.lam, 1))
            buffer.finish_path(agent)
            epoch_costs.append(c)
            cheap.append(is_cheap)
        ppo_update(agent, buffer)
        agent.lam = dual_step(agent.lam, config.lambda_lr, float(np.mean(epoch_costs)), problem.threshold)
        costs.append(float(np.mean(epoch_costs)))
        lams.append(agent.lam)
    half = epochs // 2
    p_star, lam_star = problem.optimum()
    return BanditResult(
        mean_cost=float(np.mean(costs[half:])),
        cheap_rate=float(np.mean(cheap[half * pulls_per_epoch :])),
        lam=float(np.mean(lams[half:])),
        optimal_lam=lam_star,
        optimal_cheap_rate=p_star,
    )


# reward[state][action]; taking action a moves the chain to state a
TOY_MDP_REWARDS = np.array([[0.5, 0.0], [0.0, 1.0]])


def toy_mdp_optimal_return(horizon: int, start: int = 0) -> float:
    values = np.zeros(2)
    for _ in range(horizon):
        values = np.max(TOY_MDP_REWARDS + values[None, :], axis=1)
    return float(values[start])


def _toy_features(state: int, t: int, horizon: int) -> np.ndarray:
    return np.array([float(state), t / horizon])


def toy_mdp_return(agent, horizon: int, explore: bool = False, start: int = 0) -> float:
    state, total = start, 0.0
    for t in range(horizon):
        a, _ = act_features(agent, _toy_features(state, t, horizon), explore)
        choice = int(a[0] >= 0.5)
        total += TOY_MDP_REWARDS[state, choice]
        state = choice
    return total


def run_toy_mdp(seed: int = 0, updates: int = 200, episodes_per_update: int = 8, horizon: int = 10) -> tuple[float, float]:
    """Train on the two-state chain; returns (greedy return, optimal return)."""
    config = AgentConfig(
        hidden=(16, 16),
        actor_lr=3e-3,
        critic_lr=3e-3,
        epochs_per_update=4,
        minibatch_size=64,
        reward_scale=1.0,
    )
    agent = init_agent(config, make_rng(seed, "toy-mdp"), state_dim=2, action_dim=1)
    for _ in range(updates):
        buffer = RolloutBuffer()
        for _ in range(episodes_per_update):
            state = 0
            for t in range(horizon):
                x = _toy_features(state, t, horizon)
                a, _ = act_features(agent, x, explore=True)
                choice = int(a[0] >= 0.5)
                buffer.add(x, a, float(log_prob(agent, x, a)[0]), TOY_MDP_REWARDS[state, choice])
                state = choice
            buffer.finish_path(agent)
        ppo_update(agent, buffer)
    return toy_mdp_return(agent, horizon), toy_mdp_optimal_return(horizon)


@dataclass
class CalibrationResult:
    target_mean: float
    target_std: float
    mean: float
    std: float


def run_estimator_calibration(
    seed: int = 0,
    mean: float = 5.0,
    std: float = 1.0,
    n: int = 2000,
    epochs: int = 200,
) -> CalibrationResult:
    """Fit targets drawn i.i.d. from N(mean, std^2), independent of the input."""
    rng = make_rng(seed, "calibration")
    x = rng.uniform(0.0, 1.0, size=(n, 2))
    y = rng.normal(mean, std, size=n)
    est = CostValueEstimator(EstimatorConfig(hidden=(16,), epochs=epochs), seed, state_dim=2)
    est.train(x, y)
    mu, sigma = est.predict_features(x[:200], 64, make_rng(seed, "calibration-predict"))
    return CalibrationResult(mean, std, float(mu.mean()), float(sigma.mean()))


def run_modifier_gap(config: ExperimentConfig, slice_index: int = 0, episodes: int = 4, epochs: int | None = None) -> dict:
    """Train one slice's modifier on fresh baseline states and report its held-out objective gap."""
    exp = Experiment(config)
    spec = exp.specs[slice_index]
    tables = {s.id: build_table(config.env, s, config.baseline, exp.seed) for s in exp.specs}
    network = exp.network()
    policies = [SlicePolicy(s, "baseline", table=tables[s.id]) for s in exp.specs]
    log = []
    for day in range(episodes):
        eps = run_joint_episode(exp, network, policies, RunMode("baseline", feasibility="projection"), day)
        log.extend(eps[slice_index].transitions)
    mcfg: ModifierConfig = config.modifier
    rng = make_rng(exp.seed, "oracle-modifier", spec.id)

    def cost_fn(state, action):
        return network.expected_cost(slice_index, state, action)

    data = build_modifier_dataset(
        log,
        exponential_beta_sampler(mcfg.beta_mean),
        cost_fn,
        KEY_DIMS[spec.kind.tag],
        mcfg.grid_resolution,
        mcfg.betas_per_pair,
        rng,
    )
    net = ModifierNet.create(mcfg, make_rng(exp.seed, "oracle-modifier-init", spec.id))
    stats = train_modifier(net, data, epochs, cost_fn=cost_fn, rng=rng)
    return {"slice_id": spec.id, **asdict(stats)}


def run_oracle_suite(config: ExperimentConfig) -> dict:
    seed = config.training.seed
    logger.info("[1/4] Constrained bandit")
    bandit = run_constrained_bandit(seed)
    logger.info("[2/4] Two-state MDP")
    learned, optimal = run_toy_mdp(seed)
    logger.info("[3/4] Estimator calibration")
    calibration = run_estimator_calibration(seed)
    logger.info("[4/4] Modifier objective gap")
    modifier = run_modifier_gap(config)
    return {
        "bandit": asdict(bandit),
        "toy_mdp": {"greedy_return": learned, "optimal_return": optimal},
        "estimator_calibration": asdict(calibration),
        "modifier_gap": modifier,
    }
