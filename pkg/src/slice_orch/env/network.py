"""Seedable end-to-end network simulator producing (State, reward, cost) per slot."""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..common import make_rng
from ..core import (
    RESOURCE_KINDS,
    Action,
    SliceSpec,
    State,
    cost_from_perf,
    counted_resources,
    reward_from_action,
)
from ..errors import InfeasibleActionError
from .channel import ChannelProcess
from .models import (
    EnvConfig,
    apply_noise,
    compute_load,
    performance,
    service_rate,
)
from .traffic import TrafficTrace

logger = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class StepResult:
    state: State | None
    reward: float
    cost: float
    perf: float
    traffic: float
    channel: float


def check_feasible(actions: Sequence[Action], capacities: Sequence[float], slack: float = FEASIBILITY_SLACK) -> None:
    totals = np.sum([counted_resources(a).as_array() for a in actions], axis=0)
    for kind, total, cap in zip(RESOURCE_KINDS, totals, capacities):
        if total > cap + slack:
            raise InfeasibleActionError(kind, float(total), float(cap))


class SlicingNetwork:
    """Radio, transport, core and edge domains shared by a set of slices.

    One instance is single-threaded. The trajectory is a pure function of
    (seed, episode index, actions): every episode re-derives its channel and
    noise streams from the seed.
    """

    def __init__(
        self,
        config: EnvConfig,
        slices: Sequence[SliceSpec],
        traces: Mapping[int, TrafficTrace],
        seed: int,
    ):
        self.config = config
        self.slices = list(slices)
        self.traces = traces
        self.seed = seed
        self.horizon = config.slots_per_episode
        self.slot = 0
        self.episode_index = 0
        self._states: list[State] = []
        self._rates: list[np.ndarray] = []
        self._channels: list[ChannelProcess] = []
        self._noise_rng: np.random.Generator | None = None

    @property
    def done(self) -> bool:
        return self.slot >= self.horizon

    def channel_process(self, rng: np.random.Generator) -> ChannelProcess:
        cfg = self.config
        return ChannelProcess(rng, rho=cfg.channel_rho, mean=cfg.channel_mean, noise_std=cfg.channel_noise_std)

    def reset(self, episode_index: int, variant: int = 0) -> list[State]:
        """Start the trace day ``episode_index``; ``variant`` selects independent channel and noise draws."""
        logger.debug("Resetting network for episode %d", episode_index)
        self.episode_index = episode_index
        self.slot = 0
        self._noise_rng = make_rng(self.seed, "perf-noise", episode_index, variant)
        self._rates = []
        self._channels = []
        self._states = []
        for spec in self.slices:
            trace = self.traces[spec.id]
            rates = trace.episode(episode_index, self.horizon)
            prev_day = trace.episode(episode_index - 1, self.horizon) if episode_index > 0 else rates
            channel = self.channel_process(make_rng(self.seed, "channel", episode_index, variant, spec.id))
            self._rates.append(rates)
            self._channels.append(channel)
            self._states.append(
                State(
                    slot_index=0,
                    f_prev=self._normalized_traffic(prev_day[-1], spec),
                    h_prev=channel.h,
                    g_prev=0.0,
                    w_prev=0.0,
                    r_prev=0.0,
                    c_prev=0.0,
                    sla_threshold=spec.sla_threshold,
                    cum_cost=0.0,
                    horizon=self.horizon,
                )
            )
        return list(self._states)

    @staticmethod
    def _normalized_traffic(rate: float, spec: SliceSpec) -> float:
        if spec.max_traffic <= 0:
            return 0.0
        return float(np.clip(rate / spec.max_traffic, 0.0, 1.0))

    def traffic(self, slice_idx: int) -> float:
        return float(self._rates[slice_idx][self.slot])

    def step(self, actions: Sequence[Action]) -> list[StepResult]:
        if self.done:
            raise RuntimeError("episode finished; call reset() first")
        if len(actions) != len(self.slices):
            raise ValueError(f"expected {len(self.slices)} actions, got {len(actions)}")
        check_feasible(actions, self.config.capacities)

        radio_usage = float(np.mean([(a.u_ul_bw + a.u_dl_bw) / 2.0 for a in actions]))
        t = self.slot
        results = []
        for i, (spec, action) in enumerate(zip(self.slices, actions)):
            arr = action.as_array()
            f = float(self._rates[i][t])
            h = self._channels[i].step()
            p = performance(spec.kind.tag, f, arr, h, self.config, spec.max_traffic)
            p = apply_noise(spec.kind.tag, p, self._noise_rng.standard_normal(), self.config)
            cost = cost_from_perf(p, spec.kind)
            reward = reward_from_action(action)
            rho = compute_load(f, arr, service_rate(spec.kind.tag, self.config), self.config)
            prev = self._states[i]
            next_state = None
            if t + 1 < self.horizon:
                next_state = State(
                    slot_index=t + 1,
                    f_prev=self._normalized_traffic(f, spec),
                    h_prev=h,
                    g_prev=float(np.clip(radio_usage, 0.0, 1.0)),
                    w_prev=float(min(1.0, rho)),
                    r_prev=reward,
                    c_prev=cost,
                    sla_threshold=spec.sla_threshold,
                    cum_cost=prev.cum_cost + cost,
                    horizon=self.horizon,
                )
                self._states[i] = next_state
            results.append(StepResult(next_state, reward, cost, p, f, h))
        self.slot += 1
        return results

    def expected_perf(self, slice_idx: int, state: State, action: Action) -> float:
        spec = self.slices[slice_idx]
        f = state.f_prev * spec.max_traffic
        return performance(spec.kind.tag, f, action.as_array(), state.h_prev, self.config, spec.max_traffic)

    def expected_cost(self, slice_idx: int, state: State, action: Action) -> float:
        """Noise-free cost at the state's last observed traffic and channel."""
        return cost_from_perf(self.expected_perf(slice_idx, state, action), self.slices[slice_idx].kind)
