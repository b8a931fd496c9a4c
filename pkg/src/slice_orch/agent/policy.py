"""Per-slice actor-critic: a squashed-Gaussian actor and a reward critic."""

import logging
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch.distributions import Normal

from ..core import ACTION_DIM, STATE_DIM, Action, State
from ..nn import DEFAULT_HIDDEN, DTYPE, Mlp, as_tensor, forward, init_mlp, make_adam, torch_generator

logger = logging.getLogger(__name__)

ACTION_EPS = 1e-6


@dataclass
class AgentConfig:
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    clip_ratio: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    epochs_per_update: int = 10
    minibatch_size: int = 256
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    max_grad_norm: float = 0.5
    log_std_init: float = -1.0
    min_log_std: float = -5.0
    max_log_std: float = 1.0
    reward_scale: float = 0.1
    normalize_advantages: bool = True
    lambda_init: float = 0.0
    lambda_lr: float = 500.0
    bc_lr: float = 1e-3
    bc_epochs: int = 200
    bc_batch_size: int = 256
    modified_action_policy: str = "store"
    modified_tolerance: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.clip_ratio < 1.0:
            raise ValueError(f"clip_ratio must be in (0, 1), got {self.clip_ratio}")
        if not self.lambda_lr > 0:
            raise ValueError(f"lambda_lr must be > 0, got {self.lambda_lr}")
        if self.lambda_init < 0:
            raise ValueError(f"lambda_init must be >= 0, got {self.lambda_init}")
        if self.modified_action_policy not in ("store", "discard"):
            raise ValueError(f"modified_action_policy must be 'store' or 'discard', got {self.modified_action_policy!r}")


@dataclass
class AgentState:
    config: AgentConfig
    actor: Mlp
    critic: Mlp
    log_std: torch.nn.Parameter
    lam: float
    rng: np.random.Generator
    gen: torch.Generator
    actor_opt: torch.optim.Adam
    critic_opt: torch.optim.Adam
    bc_opt: torch.optim.Adam
    updates: int = 0

    @property
    def state_dim(self) -> int:
        return self.actor.input_dim

    @property
    def action_dim(self) -> int:
        return self.actor.output_dim


def build_agent(
    config: AgentConfig,
    actor: Mlp,
    critic: Mlp,
    log_std,
    rng: np.random.Generator,
    lam: float | None = None,
    updates: int = 0,
) -> AgentState:
    log_std = torch.nn.Parameter(as_tensor(log_std).clone())
    return AgentState(
        config=config,
        actor=actor,
        critic=critic,
        log_std=log_std,
        lam=config.lambda_init if lam is None else lam,
        rng=rng,
        gen=torch_generator(rng),
        # actor and log-std share one optimizer
        actor_opt=make_adam([*actor.parameters(), log_std], config.actor_lr),
        critic_opt=make_adam(critic.parameters(), config.critic_lr),
        bc_opt=make_adam(actor.parameters(), config.bc_lr),
        updates=updates,
    )


def init_agent(
    config: AgentConfig,
    rng: np.random.Generator,
    state_dim: int = STATE_DIM,
    action_dim: int = ACTION_DIM,
    zero_actor: bool = False,
) -> AgentState:
    actor = init_mlp([state_dim, *config.hidden, action_dim], rng, output_activation="sigmoid", zero=zero_actor)
    critic = init_mlp([state_dim, *config.hidden, 1], rng)
    return build_agent(config, actor, critic, np.full(action_dim, config.log_std_init), rng)


def squashed_log_prob(u: torch.Tensor, pre: torch.Tensor, log_std: torch.Tensor) -> torch.Tensor:
    """Density of a = sigmoid(u) with u ~ N(pre, std^2), summed over action dims."""
    # -log(a * (1 - a)) for a = sigmoid(u)
    jacobian = F.softplus(u) + F.softplus(-u)
    return (Normal(pre, log_std.exp()).log_prob(u) + jacobian).sum(-1)


def act_features(agent: AgentState, x, explore: bool) -> tuple[np.ndarray, float]:
    with torch.no_grad():
        pre = agent.actor.logits(as_tensor(x))
        u = pre
        if explore:
            u = pre + agent.log_std.exp() * torch.randn(pre.shape, generator=agent.gen, dtype=DTYPE)
        logp = float(squashed_log_prob(u, pre, agent.log_std))
        a = torch.sigmoid(u).clamp(0.0, 1.0).numpy()
    return a, logp


def act(agent: AgentState, state: State, explore: bool) -> tuple[Action, float]:
    a, logp = act_features(agent, state.features(), explore)
    return Action.from_array(a, clip=True), logp


def mean_action(agent: AgentState, x) -> np.ndarray:
    return forward(agent.actor, x)


def action_logits(actions) -> torch.Tensor:
    """Pre-squash coordinates of executed actions, clipped away from 0 and 1."""
    return torch.logit(as_tensor(actions), eps=ACTION_EPS)


def policy_log_prob(agent: AgentState, x: torch.Tensor, u: torch.Tensor) -> torch.Tensor:
    """Differentiable log-density at pre-squash coordinates ``u``."""
    return squashed_log_prob(u, agent.actor.logits(x), agent.log_std)


def log_prob(agent: AgentState, x, actions) -> np.ndarray:
    """Log-density of already executed (possibly modified) actions under the current policy."""
    x = torch.atleast_2d(as_tensor(x))
    u = torch.atleast_2d(action_logits(actions))
    with torch.no_grad():
        return policy_log_prob(agent, x, u).numpy()


def value(agent: AgentState, x) -> np.ndarray:
    out = forward(agent.critic, np.atleast_2d(x))
    return out[:, 0]
