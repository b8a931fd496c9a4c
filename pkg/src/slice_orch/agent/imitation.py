import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..core import Episode
from ..errors import EmptyDatasetError
from ..nn import as_tensor, forward, optim_step
from .policy import AgentState

logger = logging.getLogger(__name__)


@dataclass
class BcStats:
    initial_mse: float
    final_mse: float
    epochs: int
    samples: int


def bc_dataset(episodes: Sequence[Episode]) -> tuple[np.ndarray, np.ndarray]:
    """Stack (state features, executed action) pairs from baseline rollouts."""
    pairs = [(tr.state.features(), tr.action.as_array()) for ep in episodes for tr in ep.transitions]
    if not pairs:
        raise EmptyDatasetError("behavior cloning needs at least one transition")
    features, actions = zip(*pairs)
    return np.stack(features), np.stack(actions)


def action_mse(agent: AgentState, features, actions) -> float:
    pred = forward(agent.actor, features)
    return float(np.mean((pred - actions) ** 2))


def bc_pretrain(agent: AgentState, features, actions, epochs: int | None = None) -> BcStats:
    """Regress the actor's mean action onto baseline actions (mean squared error)."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    if features.shape[0] == 0 or features.size == 0:
        raise EmptyDatasetError("behavior cloning needs at least one transition")
    if features.shape[0] != actions.shape[0]:
        raise ValueError(f"{features.shape[0]} states but {actions.shape[0]} actions")
    cfg = agent.config
    epochs = cfg.bc_epochs if epochs is None else epochs
    n = features.shape[0]
    initial = action_mse(agent, features, actions)
    x, y = as_tensor(features), as_tensor(actions)
    for epoch in range(epochs):
        order = torch.as_tensor(agent.rng.permutation(n))
        for start in range(0, n, cfg.bc_batch_size):
            idx = order[start : start + cfg.bc_batch_size]
            loss = F.mse_loss(agent.actor(x[idx]), y[idx])
            optim_step(agent.actor, loss, agent.bc_opt)
        if (epoch + 1) % 50 == 0:
            logger.debug("[%d/%d] BC action MSE %.6f", epoch + 1, epochs, action_mse(agent, features, actions))
    final = action_mse(agent, features, actions)
    logger.info("Behavior cloning: MSE %.6f -> %.6f over %d samples", initial, final, n)
    return BcStats(initial_mse=initial, final_mse=final, epochs=epochs, samples=n)
