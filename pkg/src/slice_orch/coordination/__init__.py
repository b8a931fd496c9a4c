from .coordinator import (
    CoordConfig,
    CoordResult,
    CoordState,
    NoisyModifier,
    coordinate,
    demand,
    fixed_beta_actions,
)
from .modifier import (
    ModifierConfig,
    ModifierDataset,
    ModifierNet,
    ModifierStats,
    build_modifier_dataset,
    exponential_beta_sampler,
    load_modifier,
    modify,
    save_modifier,
    train_modifier,
)
from .oracle import OracleModifier, brute_force_modify, h_objective, relative_gap

__all__ = [
    "CoordConfig",
    "CoordResult",
    "CoordState",
    "ModifierConfig",
    "ModifierDataset",
    "ModifierNet",
    "ModifierStats",
    "NoisyModifier",
    "OracleModifier",
    "brute_force_modify",
    "build_modifier_dataset",
    "coordinate",
    "demand",
    "exponential_beta_sampler",
    "fixed_beta_actions",
    "h_objective",
    "load_modifier",
    "modify",
    "relative_gap",
    "save_modifier",
    "train_modifier",
]
