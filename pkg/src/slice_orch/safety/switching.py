"""Proactive switching from the learned policy to the baseline within an episode."""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..common import make_rng
from ..core import Action, Episode, PolicySource, State, Transition

logger = logging.getLogger(__name__)

SWITCH_MODES = ("proactive", "reactive", "never")


class CostPredictor(Protocol):
    def predict(self, state: State) -> tuple[float, float]: ...


@dataclass
class SafetyConfig:
    eta: float = 1.0
    n_samples: int = 32
    mode: str = "proactive"
    est_noise_std: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.mode not in SWITCH_MODES:
            raise ValueError(f"mode must be one of {SWITCH_MODES}, got {self.mode!r}")


def should_switch(cum_cost: float, mu: float, sigma: float, cfg: SafetyConfig, horizon: int, sla_threshold: float) -> bool:
    """Switch iff cum_cost + mu + eta * sigma >= T * C_max (ties switch)."""
    return cum_cost + mu + cfg.eta * sigma >= horizon * sla_threshold


@dataclass
class SafetyGuard:
    """Per-slice, per-episode switching state. Once switched it stays switched."""

    config: SafetyConfig
    estimator: CostPredictor | None
    horizon: int
    sla_threshold: float
    noise_rng: np.random.Generator | None = None
    switched: bool = False
    truncation_slot: int | None = None
    last_prediction: tuple[float, float] = (0.0, 0.0)

    def check(self, state: State) -> bool:
        if self.switched:
            return True
        cfg = self.config
        if cfg.mode == "never":
            return False
        mu, sigma = 0.0, 0.0
        if cfg.mode == "proactive" and self.estimator is not None:
            mu, sigma = self.estimator.predict(state)
            if cfg.est_noise_std > 0 and self.noise_rng is not None:
                mu += cfg.est_noise_std * self.noise_rng.standard_normal()
        self.last_prediction = (mu, sigma)
        if should_switch(state.cum_cost, mu, sigma, cfg, self.horizon, self.sla_threshold):
            self.switched = True
            self.truncation_slot = state.slot_index
            logger.debug(
                "Switching to baseline at slot %d (cum %.3f, mu %.3f, sigma %.3f)",
                state.slot_index,
                state.cum_cost,
                mu,
                sigma,
            )
        return self.switched


def run_guarded_episode(
    policy: Callable[[State], Action],
    estimator: CostPredictor | None,
    baseline: Callable[[State], Action],
    env,
    cfg: SafetyConfig,
    episode_index: int = 0,
    seed: int = 0,
) -> Episode:
    """Roll one single-slice episode, handing control to the baseline for good once the guard fires."""
    state = env.reset(episode_index)[0]
    spec = env.slices[0]
    guard = SafetyGuard(
        cfg,
        estimator,
        env.horizon,
        spec.sla_threshold,
        noise_rng=make_rng(seed, "est-noise", episode_index, spec.id),
    )
    transitions = []
    while state is not None:
        if guard.check(state):
            action, source = baseline(state), PolicySource.BASELINE
        else:
            action, source = policy(state), PolicySource.LEARNED
        result = env.step([action])[0]
        transitions.append(Transition(state, action, result.reward, result.cost, source, result.perf))
        state = result.state
    return Episode(transitions, spec.sla_threshold, guard.truncation_slot, slice_id=spec.id)
