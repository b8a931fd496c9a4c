from .checkpoint import agent_from_doc, agent_to_doc, load_agent, save_agent
from .imitation import BcStats, action_mse, bc_dataset, bc_pretrain
from .lagrange import shaped_reward, update_lambda
from .policy import (
    AgentConfig,
    AgentState,
    act,
    act_features,
    build_agent,
    init_agent,
    log_prob,
    mean_action,
    squashed_log_prob,
    value,
)
from .ppo import PpoStats, RolloutBuffer, add_episode, clipped_surrogate, ppo_update

__all__ = [
    "AgentConfig",
    "AgentState",
    "BcStats",
    "PpoStats",
    "RolloutBuffer",
    "act",
    "act_features",
    "build_agent",
    "action_mse",
    "add_episode",
    "agent_from_doc",
    "agent_to_doc",
    "bc_dataset",
    "bc_pretrain",
    "clipped_surrogate",
    "init_agent",
    "load_agent",
    "log_prob",
    "mean_action",
    "ppo_update",
    "save_agent",
    "shaped_reward",
    "squashed_log_prob",
    "update_lambda",
    "value",
]
