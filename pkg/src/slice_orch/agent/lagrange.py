import logging
from collections.abc import Sequence

import numpy as np

from ..core import Episode
from ..errors import EmptyDatasetError
from .policy import AgentState

logger = logging.getLogger(__name__)


def shaped_reward(r: float, c: float, lam: float, horizon: int) -> float:
    """Per-slot Lagrangian term r - (lam / T) * c."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return r - (lam / horizon) * c


def dual_step(lam: float, lr: float, mean_cost: float, threshold: float) -> float:
    return max(0.0, lam + lr * (mean_cost - threshold))


def update_lambda(agent: AgentState, episodes: Sequence[Episode]) -> float:
    """Projected subgradient step on the multiplier.

    Uses every transition, learned or baseline, since the constraint is on
    the cost the slice actually experienced.
    """
    if not episodes:
        raise EmptyDatasetError("update_lambda needs at least one episode")
    mean_cost = float(np.mean([ep.mean_cost for ep in episodes]))
    threshold = episodes[0].sla_threshold
    agent.lam = dual_step(agent.lam, agent.config.lambda_lr, mean_cost, threshold)
    logger.debug("lambda -> %.4f (mean cost %.4f, threshold %.4f)", agent.lam, mean_cost, threshold)
    return agent.lam
