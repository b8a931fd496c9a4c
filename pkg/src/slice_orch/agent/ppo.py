"""Clipped-surrogate policy optimization over the learned prefix of each episode."""

import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from ..core import Episode
from ..errors import EmptyDatasetError
from ..nn import as_tensor, optim_step
from .lagrange import shaped_reward
from .policy import AgentState, action_logits, log_prob, policy_log_prob, value

logger = logging.getLogger(__name__)


@dataclass
class RolloutBuffer:
    """Effective transitions only; baseline-controlled slots never enter."""

    features: list[np.ndarray] = field(default_factory=list)
    actions: list[np.ndarray] = field(default_factory=list)
    logps: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    mask: list[bool] = field(default_factory=list)
    advantages: list[float] = field(default_factory=list)
    returns: list[float] = field(default_factory=list)
    _path_start: int = 0

    def __len__(self) -> int:
        return len(self.rewards)

    def add(self, x, action, logp: float, reward: float, train_actor: bool = True) -> None:
        self.features.append(np.asarray(x, dtype=float))
        self.actions.append(np.asarray(action, dtype=float))
        self.logps.append(float(logp))
        self.rewards.append(float(reward))
        self.mask.append(bool(train_actor))

    def finish_path(self, agent: AgentState, bootstrap_x=None) -> None:
        """Close the current path with generalized advantage estimation.

        A truncated path bootstraps its tail with the critic's value of the
        state at the truncation slot; a complete one ends at zero.
        """
        start, end = self._path_start, len(self.rewards)
        if end == start:
            return
        cfg = agent.config
        x = np.stack(self.features[start:end])
        values = value(agent, x)
        last = float(value(agent, bootstrap_x)[0]) if bootstrap_x is not None else 0.0
        next_values = np.append(values[1:], last)
        rewards = np.asarray(self.rewards[start:end])
        deltas = rewards + cfg.gamma * next_values - values
        adv = np.zeros_like(deltas)
        running = 0.0
        for t in range(len(deltas) - 1, -1, -1):
            running = deltas[t] + cfg.gamma * cfg.gae_lambda * running
            adv[t] = running
        self.advantages.extend(adv.tolist())
        self.returns.extend((adv + values).tolist())
        self._path_start = end


@dataclass
class PpoStats:
    actor_loss: float
    critic_loss: float
    approx_kl: float
    clip_fraction: float
    samples: int


def add_episode(buffer: RolloutBuffer, agent: AgentState, episode: Episode) -> int:
    """Append an episode's learned prefix, with shaped and scaled rewards.

    Returns the number of transitions added.
    """
    cfg = agent.config
    effective = episode.effective()
    for tr in effective:
        executed = tr.action.as_array()
        x = tr.state.features()
        train_actor = True
        if tr.proposed is not None and cfg.modified_action_policy == "discard":
            train_actor = float(np.max(np.abs(executed - tr.proposed.as_array()))) <= cfg.modified_tolerance
        r = shaped_reward(tr.reward, tr.cost, agent.lam, episode.horizon) * cfg.reward_scale
        buffer.add(x, executed, float(log_prob(agent, x, executed)[0]), r, train_actor)
    bootstrap = None
    if episode.truncation_slot is not None and episode.truncation_slot < episode.horizon:
        bootstrap = episode.transitions[episode.truncation_slot].state.features()
    if effective:
        buffer.finish_path(agent, bootstrap)
    return len(effective)


def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip_ratio: float) -> torch.Tensor:
    """Per-sample min(r * A, clip(r, 1 - eps, 1 + eps) * A)."""
    return torch.min(ratio * advantages, torch.clamp(ratio, 1 - clip_ratio, 1 + clip_ratio) * advantages)


def ppo_update(agent: AgentState, buffer: RolloutBuffer) -> PpoStats:
    if len(buffer) == 0:
        raise EmptyDatasetError("ppo_update needs a non-empty rollout buffer")
    if len(buffer.advantages) != len(buffer):
        raise ValueError("rollout buffer has an unfinished path; call finish_path first")
    cfg = agent.config
    x = as_tensor(np.stack(buffer.features))
    u = action_logits(np.stack(buffer.actions))
    logp_old = as_tensor(buffer.logps)
    adv = np.asarray(buffer.advantages)
    if cfg.normalize_advantages and len(adv) > 1:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    adv = as_tensor(adv)
    returns = as_tensor(buffer.returns)
    mask = torch.as_tensor(buffer.mask, dtype=torch.bool)

    n = len(buffer)
    actor_losses, critic_losses, kls, clip_fracs = [], [], [], []
    for _ in range(cfg.epochs_per_update):
        order = torch.as_tensor(agent.rng.permutation(n))
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start : start + cfg.minibatch_size]
            m = mask[idx]
            n_actor = max(1, int(m.sum()))
            logp = policy_log_prob(agent, x[idx], u[idx])
            ratio = torch.exp(logp - logp_old[idx])
            surrogate = clipped_surrogate(ratio, adv[idx], cfg.clip_ratio)
            actor_loss = -(surrogate * m).sum() / n_actor
            optim_step(agent.actor, actor_loss, agent.actor_opt, cfg.max_grad_norm)
            with torch.no_grad():
                agent.log_std.clamp_(cfg.min_log_std, cfg.max_log_std)

            critic_loss = 0.5 * ((agent.critic(x[idx])[:, 0] - returns[idx]) ** 2).mean()
            optim_step(agent.critic, critic_loss, agent.critic_opt, cfg.max_grad_norm)

            with torch.no_grad():
                actor_losses.append(float(actor_loss))
                critic_losses.append(float(critic_loss))
                if m.any():
                    kls.append(float((logp_old[idx] - logp)[m].mean()))
                    clip_fracs.append(float(((ratio - 1.0).abs() > cfg.clip_ratio)[m].double().mean()))
                else:
                    kls.append(0.0)
                    clip_fracs.append(0.0)
    agent.updates += 1
    stats = PpoStats(
        actor_loss=float(np.mean(actor_losses)),
        critic_loss=float(np.mean(critic_losses)),
        approx_kl=float(np.mean(kls)),
        clip_fraction=float(np.mean(clip_fracs)),
        samples=n,
    )
    logger.debug("PPO update %d: %s", agent.updates, stats)
    return stats
