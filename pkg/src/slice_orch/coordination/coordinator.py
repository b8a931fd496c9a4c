"""Per-resource price coordination between slice modifiers and capacity owners."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..baseline.projection import project_actions
from ..core import COUNTED_INDICES, NUM_RESOURCES, Action, ResourceVector, State

logger = logging.getLogger(__name__)


class Modifier(Protocol):
    def __call__(self, state: State, a: Action, beta: ResourceVector) -> Action: ...


@dataclass
class CoordConfig:
    step: float = 0.5
    max_rounds: int = 10
    slack: float = 1e-6
    warm_start: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")


@dataclass
class CoordState:
    config: CoordConfig = field(default_factory=CoordConfig)
    beta: np.ndarray = field(default_factory=lambda: np.zeros(NUM_RESOURCES))

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float).copy()
        if self.beta.shape != (NUM_RESOURCES,) or np.any(self.beta < 0):
            raise ValueError(f"beta must be {NUM_RESOURCES} non-negative values, got {self.beta}")

    def reset(self) -> None:
        self.beta[:] = 0.0


@dataclass
class CoordResult:
    actions: list[Action]
    rounds: int
    converged: bool
    beta: np.ndarray


def demand(actions: Sequence[Action]) -> np.ndarray:
    return np.sum([a.as_array()[list(COUNTED_INDICES)] for a in actions], axis=0)


def coordinate(
    states: Sequence[State],
    actions: Sequence[Action],
    modifiers: Sequence[Modifier],
    coord: CoordState,
    capacities: ResourceVector,
) -> CoordResult:
    """Raise prices on over-requested resources until every slice's modified action fits.

    The price update runs every round, the feasible one included, so prices
    relax when demand falls. Without convergence inside ``max_rounds`` the last
    iterate is projected onto the capacities.
    """
    cfg = coord.config
    if not cfg.warm_start:
        coord.reset()
    caps = capacities.as_array()
    modified = list(actions)
    converged = False
    rounds = 0
    for rounds in range(1, cfg.max_rounds + 1):
        beta = ResourceVector.from_array(coord.beta)
        modified = [m(s, a, beta) for m, s, a in zip(modifiers, states, actions)]
        totals = demand(modified)
        coord.beta = np.maximum(0.0, coord.beta + cfg.step * (totals - caps))
        logger.debug("Coordination round %d: demand %s, beta %s", rounds, np.round(totals, 4), np.round(coord.beta, 4))
        if np.all(totals <= caps + cfg.slack):
            converged = True
            break
    if not converged:
        logger.warning("Coordination did not converge in %d rounds; projecting onto capacities", cfg.max_rounds)
    # identity unless a resource is still over capacity
    modified = project_actions(modified, capacities)
    return CoordResult(modified, rounds, converged, coord.beta.copy())


def fixed_beta_actions(
    states: Sequence[State],
    actions: Sequence[Action],
    modifiers: Sequence[Modifier],
    beta: ResourceVector,
    capacities: ResourceVector,
) -> list[Action]:
    """One modification pass at frozen prices, made feasible by projection."""
    modified = [m(s, a, beta) for m, s, a in zip(modifiers, states, actions)]
    return project_actions(modified, capacities)


class NoisyModifier:
    """Adds zero-mean Gaussian noise to another modifier's output before clipping."""

    def __init__(self, base: Modifier, std: float, rng: np.random.Generator):
        self.base = base
        self.std = std
        self.rng = rng

    def __call__(self, state: State, a: Action, beta: ResourceVector) -> Action:
        out = self.base(state, a, beta).as_array()
        return Action.from_array(out + self.std * self.rng.standard_normal(out.shape), clip=True)
